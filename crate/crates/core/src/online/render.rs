//! Drift monitor export: a CSV curve file and two SVG charts (per-batch on
//! top, per-label below) with a warning marker on every flagged window.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::MonitorLog;
use crate::error::{DriftError, Result};
use crate::io::atomic_write;

/// One parsed row of a curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub window_id: u64,
    pub timestamp: Option<String>,
    pub batch_distance: Option<f64>,
    pub batch_drift: bool,
    /// `(distance, drift)` per label, label-set order.
    pub labels: Vec<(Option<f64>, bool)>,
}

/// Paths written by [`render_monitor`].
#[derive(Debug, Clone)]
pub struct RenderedMonitor {
    pub curve_file: PathBuf,
    pub batch_chart: PathBuf,
    pub label_chart: PathBuf,
    pub log_file: PathBuf,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn curve_csv(log: &MonitorLog) -> Result<Vec<u8>> {
    let metric = log.metric.name();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "window_id".to_string(),
        "timestamp".to_string(),
        format!("batch_{metric}"),
        "batch_drift".to_string(),
    ];
    for l in &log.label_set {
        header.push(format!("label_{l}_{metric}"));
        header.push(format!("label_{l}_drift"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in log.reports() {
        let mut rec = vec![
            r.window_id.to_string(),
            r.timestamp.clone().unwrap_or_default(),
            fmt_opt(r.batch_distance),
            flag(r.batch_drift).to_string(),
        ];
        for &l in &log.label_set {
            match r.label(l) {
                Some(e) => {
                    rec.push(fmt_opt(e.distance));
                    rec.push(flag(e.drift).to_string());
                }
                None => {
                    rec.push(String::new());
                    rec.push("0".to_string());
                }
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| DriftError::Io(std::io::Error::other(e.to_string())))
}

fn csv_err(e: csv::Error) -> DriftError {
    DriftError::Format(format!("csv: {e}"))
}

/// Writes the curve file: `window_id, timestamp, batch distance, batch flag`
/// followed by a distance/flag column pair per label. Empty distance cells
/// mark insufficient labels or failed windows.
pub fn write_curve_file(log: &MonitorLog, path: &Path) -> Result<()> {
    atomic_write(path, &curve_csv(log)?)
}

/// Parses a curve file written by [`write_curve_file`].
pub fn read_curve_file(path: &Path) -> Result<Vec<CurveRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let width = rdr.headers().map_err(csv_err)?.len();
    if width < 4 || (width - 4) % 2 != 0 {
        return Err(DriftError::Format(format!("unexpected curve header width {width}")));
    }
    let parse_opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>()
                .map(Some)
                .map_err(|e| DriftError::Format(format!("bad distance `{s}`: {e}")))
        }
    };
    let parse_flag = |s: &str| -> Result<bool> {
        match s {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(DriftError::Format(format!("bad flag `{other}`"))),
        }
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let window_id = rec[0]
            .parse()
            .map_err(|e| DriftError::Format(format!("bad window id: {e}")))?;
        let timestamp = (!rec[1].is_empty()).then(|| rec[1].to_string());
        let mut labels = Vec::new();
        for pair in (4..width).step_by(2) {
            labels.push((parse_opt(&rec[pair])?, parse_flag(&rec[pair + 1])?));
        }
        rows.push(CurveRow {
            window_id,
            timestamp,
            batch_distance: parse_opt(&rec[2])?,
            batch_drift: parse_flag(&rec[3])?,
            labels,
        });
    }
    Ok(rows)
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Frame {
    width: f64,
    height: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    n: usize,
    y_max: f64,
}

impl Frame {
    fn x(&self, i: usize) -> f64 {
        let span = self.width - self.left - self.right;
        if self.n <= 1 {
            self.left + span / 2.0
        } else {
            self.left + span * i as f64 / (self.n - 1) as f64
        }
    }

    fn y(&self, v: f64) -> f64 {
        let span = self.height - self.top - self.bottom;
        self.height - self.bottom - span * (v / self.y_max).clamp(0.0, 1.0)
    }

    fn axes(&self, out: &mut String, title: &str, ids: &[u64], timestamps: &[Option<String>]) {
        let (x0, y0) = (self.left, self.height - self.bottom);
        let x1 = self.width - self.right;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="18" font-size="14" font-family="sans-serif">{}</text>"#,
            self.left,
            escape(title)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}" stroke="#333"/>"##
        );
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.1}" y1="{:.1}" x2="{x0:.1}" y2="{y0:.1}" stroke="#333"/>"##,
            self.top
        );
        for t in 0..=4 {
            let v = self.y_max * t as f64 / 4.0;
            let y = self.y(v);
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end" font-family="sans-serif">{}</text>"#,
                x0 - 4.0,
                y + 3.0,
                fmt_tick(v)
            );
        }
        let step = (self.n / 10).max(1);
        for i in (0..self.n).step_by(step) {
            let x = self.x(i);
            let label = match &timestamps[i] {
                Some(ts) => format!("{} ({})", ids[i], escape(ts)),
                None => ids[i].to_string(),
            };
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle" font-family="sans-serif">{label}</text>"#,
                y0 + 14.0
            );
        }
    }

    fn threshold(&self, out: &mut String, t: f64, color: &str) {
        if t.is_finite() {
            let y = self.y(t);
            let _ = writeln!(
                out,
                r#"<line class="threshold" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                self.left,
                self.width - self.right
            );
        }
    }

    fn curve(&self, out: &mut String, values: &[Option<f64>], color: &str) {
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, out: &mut String| {
            if !seg.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<polyline class="curve" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    seg.join(" ")
                );
                seg.clear();
            }
        };
        for (i, v) in values.iter().enumerate() {
            match v {
                Some(v) => segment.push(format!("{:.2},{:.2}", self.x(i), self.y(*v))),
                None => flush(&mut segment, out),
            }
        }
        flush(&mut segment, out);
    }

    fn warning(&self, out: &mut String, i: usize, color: &str) {
        let x = self.x(i);
        let y = self.height - self.bottom + 20.0;
        let _ = writeln!(
            out,
            r#"<path class="warning" d="M {:.1} {:.1} L {:.1} {:.1} L {:.1} {:.1} Z" fill="{color}"/>"#,
            x,
            y - 6.0,
            x - 5.0,
            y + 3.0,
            x + 5.0,
            y + 3.0
        );
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn y_max<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let m = values.filter(|v| v.is_finite()).fold(0.0f64, |a, &b| a.max(b));
    if m > 0.0 {
        m * 1.1
    } else {
        1.0
    }
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn batch_chart(log: &MonitorLog) -> String {
    let values: Vec<Option<f64>> = log.reports().iter().map(|r| r.batch_distance).collect();
    let ids: Vec<u64> = log.reports().iter().map(|r| r.window_id).collect();
    let ts: Vec<Option<String>> = log.reports().iter().map(|r| r.timestamp.clone()).collect();
    let frame = Frame {
        width: 900.0,
        height: 300.0,
        left: 60.0,
        right: 20.0,
        top: 30.0,
        bottom: 50.0,
        n: values.len(),
        y_max: y_max(values.iter().flatten().chain(std::iter::once(&log.t_batch))),
    };
    let mut out = svg_open(frame.width, frame.height);
    frame.axes(
        &mut out,
        &format!("Per-batch {} distance", log.metric.name().to_uppercase()),
        &ids,
        &ts,
    );
    frame.threshold(&mut out, log.t_batch, "#d62728");
    frame.curve(&mut out, &values, PALETTE[0]);
    for (i, r) in log.reports().iter().enumerate() {
        if r.batch_drift {
            frame.warning(&mut out, i, "#d62728");
        }
    }
    out.push_str("</svg>\n");
    out
}

fn label_chart(log: &MonitorLog) -> String {
    let ids: Vec<u64> = log.reports().iter().map(|r| r.window_id).collect();
    let ts: Vec<Option<String>> = log.reports().iter().map(|r| r.timestamp.clone()).collect();
    let series: Vec<Vec<Option<f64>>> = log
        .label_set
        .iter()
        .map(|&l| {
            log.reports()
                .iter()
                .map(|r| r.label(l).and_then(|e| e.distance))
                .collect()
        })
        .collect();
    let frame = Frame {
        width: 900.0,
        height: 340.0,
        left: 60.0,
        right: 140.0,
        top: 30.0,
        bottom: 50.0,
        n: ids.len(),
        y_max: y_max(series.iter().flatten().flatten().chain(log.t_label.iter())),
    };
    let mut out = svg_open(frame.width, frame.height);
    frame.axes(
        &mut out,
        &format!("Per-label {} distance", log.metric.name().to_uppercase()),
        &ids,
        &ts,
    );
    for (pos, &label) in log.label_set.iter().enumerate() {
        let color = PALETTE[pos % PALETTE.len()];
        frame.threshold(&mut out, log.t_label[pos], color);
        frame.curve(&mut out, &series[pos], color);
        for (i, r) in log.reports().iter().enumerate() {
            if r.label(label).is_some_and(|e| e.drift) {
                frame.warning(&mut out, i, color);
            }
        }
        let ly = frame.top + 16.0 * pos as f64 + 10.0;
        let lx = frame.width - frame.right + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="11" font-family="sans-serif">label {label}</text>"#,
            ly - 9.0,
            lx + 14.0,
            ly
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `curves.csv`, `batch_monitor.svg`, `label_monitor.svg` and the
/// full log as `monitor.json` into `out_dir`.
pub fn render_monitor(log: &MonitorLog, out_dir: &Path) -> Result<RenderedMonitor> {
    if log.is_empty() {
        return Err(DriftError::NothingToRender);
    }
    std::fs::create_dir_all(out_dir)?;
    let out = RenderedMonitor {
        curve_file: out_dir.join("curves.csv"),
        batch_chart: out_dir.join("batch_monitor.svg"),
        label_chart: out_dir.join("label_monitor.svg"),
        log_file: out_dir.join("monitor.json"),
    };
    write_curve_file(log, &out.curve_file)?;
    atomic_write(&out.batch_chart, batch_chart(log).as_bytes())?;
    atomic_write(&out.label_chart, label_chart(log).as_bytes())?;
    let json = serde_json::to_vec_pretty(log)
        .map_err(|e| DriftError::Format(format!("json: {e}")))?;
    atomic_write(&out.log_file, &json)?;
    Ok(out)
}

//! The `embdrift` command line.
//!
//! Domain errors exit with [`DriftError::exit_code`]; usage errors exit 2.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use crate::batch::EmbeddingBatch;
use crate::error::{DriftError, Result};
use crate::eval::{
    benchmark_runtime, build_stream, evaluate_detection, generate_pattern, spearman_corr,
    write_bench_table, BenchConfig, DetectionReport, DriftSchedule, Pattern, SamplePools,
    SeverityFlags, SynthConfig, SynthSource,
};
use crate::explain::{explain_window, purity, ExplainConfig, Scope, WindowExplanation};
use crate::io::{
    self, load_bundle, load_stream_windows, read_embeddings, read_stream_dir, save_bundle,
    write_embeddings, write_json, write_stream_dir, ConfigFile, LoadedBundle, ManifestEntry,
    ModelBundle, StreamManifest,
};
use crate::offline::{estimate_thresholds, fit_baseline, OfflineConfig};
use crate::online::{render_monitor, run_stream_windows, Detector, MonitorLog, StreamWindow, WindowReport};
use crate::rng::stream_rng;
use crate::stats::DistanceKind;

#[derive(Debug, Parser)]
#[command(name = "embdrift", version, about = "Concept-drift detection on embedding streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the baseline (PCA + Gaussians) on historical embeddings.
    FitBaseline(FitArgs),
    /// Estimate drift thresholds and write a complete model bundle.
    EstimateThreshold(ThresholdArgs),
    /// Analyze a stream of windows and write curves and charts.
    Monitor(MonitorArgs),
    /// Cluster a window and report prototypes.
    Explain(ExplainArgs),
    /// Generate a stream directory with a drift pattern and a truth manifest.
    Simulate(SimulateArgs),
    /// Score a simulated stream against its truth manifest.
    Evaluate(EvaluateArgs),
    /// Time window analysis on synthetic embeddings.
    Bench(BenchArgs),
}

/// Offline parameters. Precedence: flag, then `--config` file, then default.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any of: d_prime, d_prime_label, n_th, t_alpha,
    /// window_size, metric, seed, labels.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-batch PCA components [default: 150]
    #[arg(long)]
    pub d_prime: Option<usize>,
    /// Per-label PCA components [default: 75]
    #[arg(long)]
    pub d_prime_label: Option<usize>,
    /// Resampled windows for threshold estimation [default: 10000]
    #[arg(long)]
    pub n_th: Option<usize>,
    /// Threshold sensitivity [default: 0.01]
    #[arg(long)]
    pub t_alpha: Option<f64>,
    /// Online window size
    #[arg(long)]
    pub window_size: Option<usize>,
    /// fdd, kl, js, mahalanobis or bhattacharyya [default: fdd]
    #[arg(long)]
    pub metric: Option<DistanceKind>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn file(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    /// Applies file values then flags onto `base`; returns the metric and
    /// whether a window size was given explicitly.
    fn resolve(&self, base: &mut OfflineConfig) -> Result<(DistanceKind, bool)> {
        let file = self.file()?;
        file.apply(base);
        let cli = ConfigFile {
            d_prime: self.d_prime,
            d_prime_label: self.d_prime_label,
            n_th: self.n_th,
            t_alpha: self.t_alpha,
            window_size: self.window_size,
            metric: self.metric,
            seed: self.seed,
            labels: None,
        };
        cli.apply(base);
        let metric = self.metric.or(file.metric).unwrap_or_default();
        Ok((metric, self.window_size.or(file.window_size).is_some()))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Historical embeddings (.dlem binary or .csv)
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Output model file
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Creation time recorded in the model (RFC 3339); pins the output bytes
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Model file from fit-baseline
    #[arg(long)]
    pub model: PathBuf,
    /// Threshold embeddings, disjoint from the historical set
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Stream directory (window files replayed in name order)
    #[arg(long, conflicts_with = "windows")]
    pub stream: Option<PathBuf>,
    /// Explicit window files, in order
    #[arg(long, num_args = 1..)]
    pub windows: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Window file(s); several are concatenated in order
    #[arg(long, required = true, num_args = 1..)]
    pub window: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, default_value_t = 5)]
    pub top_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip per-label clustering
    #[arg(long)]
    pub batch_only: bool,
    /// Text file with one sample identifier per row
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Stream manifest holding the drifted rows of the windows (enables purity)
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output report (JSON)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// sudden, incremental, periodic or constant
    #[arg(long, default_value = "sudden")]
    pub pattern: String,
    #[arg(long)]
    pub total: Option<usize>,
    #[arg(long)]
    pub onset: Option<usize>,
    /// Drift percentage (sudden, periodic, constant)
    #[arg(long)]
    pub level: Option<f64>,
    /// Initial percentage (incremental)
    #[arg(long)]
    pub start: Option<f64>,
    /// Growth per window (incremental)
    #[arg(long)]
    pub step: Option<f64>,
    /// Block length (periodic)
    #[arg(long)]
    pub block: Option<usize>,
    /// Nondrift pool file; omit to use synthetic pools
    #[arg(long, requires = "drift")]
    pub nondrift: Option<PathBuf>,
    /// Drift pool file
    #[arg(long)]
    pub drift: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n_labels: usize,
    #[arg(long, default_value_t = 256)]
    pub dim: usize,
    #[arg(long, default_value_t = 5000)]
    pub rows_per_label: usize,
    #[arg(long, default_value_t = 8.0)]
    pub drift_shift: f64,
    #[arg(long, default_value_t = 4.0)]
    pub separation: f64,
    /// Also write synthetic historical.dlem and threshold.dlem here
    #[arg(long)]
    pub training_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub window_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timestamp of the first window (RFC 3339); later windows follow at
    /// `--interval-secs`
    #[arg(long)]
    pub start_time: Option<String>,
    #[arg(long, default_value_t = 60)]
    pub interval_secs: i64,
    /// Output stream directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Stream directory with a manifest carrying truth flags
    #[arg(long)]
    pub stream: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 5000, 10000])]
    pub window_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1000])]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1000])]
    pub baseline_rows: Vec<usize>,
    #[arg(long, default_value_t = 150)]
    pub d_prime: usize,
    #[arg(long, default_value_t = 75)]
    pub d_prime_label: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Failure {
    Usage(clap::Error),
    Domain(DriftError),
}

impl From<DriftError> for Failure {
    fn from(e: DriftError) -> Self {
        Failure::Domain(e)
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("embdrift: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::FitBaseline(a) => fit(a)?,
        Command::EstimateThreshold(a) => thresholds(a)?,
        Command::Monitor(a) => monitor(a)?,
        Command::Explain(a) => explain(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Evaluate(a) => evaluate(a)?,
        Command::Bench(a) => bench(a)?,
    }
    Ok(())
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn load(path: &Path) -> Result<LoadedBundle> {
    let loaded = load_bundle(path)?;
    warn_all(&loaded.warnings);
    Ok(loaded)
}

fn fit(a: FitArgs) -> Result<()> {
    let mut config = OfflineConfig::default();
    a.config.resolve(&mut config)?;
    let historical = read_embeddings(&a.embeddings)?;
    let baseline = fit_baseline(&historical, &config)?;
    let bundle = ModelBundle::new(baseline, None, a.timestamp);
    save_bundle(&a.out, &bundle)?;
    eprintln!(
        "baseline: {} rows, {} labels, d={} -> d'={}, d'_l={}; written to {}",
        historical.len(),
        bundle.baseline.label_set().len(),
        historical.dim(),
        config.d_prime,
        config.d_prime_label,
        a.out.display()
    );
    Ok(())
}

fn thresholds(a: ThresholdArgs) -> std::result::Result<(), Failure> {
    // usage problems are reported before any file is touched
    if !a.config.resolve(&mut OfflineConfig::default())?.1 {
        let err = Cli::command().error(
            ErrorKind::MissingRequiredArgument,
            "estimate-threshold needs --window-size (or window_size in --config)",
        );
        return Err(Failure::Usage(err));
    }
    let loaded = load(&a.model)?;
    let mut config = loaded.bundle.baseline.config().clone();
    let (metric, _) = a.config.resolve(&mut config)?;
    if config.d_prime != loaded.bundle.baseline.config().d_prime
        || config.d_prime_label != loaded.bundle.baseline.config().d_prime_label
    {
        eprintln!("warning: PCA sizes are fixed by the model; --d-prime/--d-prime-label ignored");
    }
    let data = read_embeddings(&a.embeddings)?;
    let t = estimate_thresholds(&loaded.bundle.baseline, &data, metric, &config)?;
    warn_all(&t.warnings);
    eprintln!(
        "thresholds ({metric}, n_th={}, t_alpha={}, window={}): batch {:.6}",
        t.n_th, t.t_alpha, t.window_size, t.t_batch
    );
    let bundle = ModelBundle::new(loaded.bundle.baseline, Some(t), a.timestamp);
    save_bundle(&a.out, &bundle)?;
    Ok(())
}

fn baseline_id(bundle: &ModelBundle) -> String {
    bundle.metadata.config_hash.chars().take(12).collect()
}

fn monitor(a: MonitorArgs) -> Result<()> {
    let loaded = load(&a.bundle)?;
    let bundle = &loaded.bundle;
    let thresholds = bundle.thresholds()?;
    let windows: Vec<StreamWindow> = match &a.stream {
        Some(dir) => load_stream_windows(&read_stream_dir(dir)?)?,
        None if !a.windows.is_empty() => a
            .windows
            .iter()
            .map(|p| {
                Ok(StreamWindow {
                    batch: read_embeddings(p)?,
                    timestamp: None,
                })
            })
            .collect::<Result<_>>()?,
        None => {
            return Err(DriftError::InvalidInput(
                "give --stream or --windows".into(),
            ))
        }
    };
    let log = run_stream_windows(&bundle.baseline, thresholds, &windows, &baseline_id(bundle))?;
    for r in log.reports() {
        for w in &r.warnings {
            eprintln!("warning: window {}: {w}", r.window_id);
        }
    }
    let out = render_monitor(&log, &a.out)?;
    let flagged = log.batch_flags().iter().filter(|&&f| f).count();
    eprintln!(
        "{} windows, {} flagged; curves in {}",
        log.len(),
        flagged,
        out.curve_file.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ScopeSummary {
    scope: Scope,
    k: usize,
    silhouette: f64,
    cluster_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drifted_per_cluster: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prototype_ids: Option<Vec<Vec<String>>>,
}

#[derive(Serialize)]
struct ExplainOutput {
    windows: Vec<String>,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    analysis: Option<WindowReport>,
    summaries: Vec<ScopeSummary>,
    explanation: WindowExplanation,
}

fn drift_flags_from_manifest(manifest: &Path, windows: &[PathBuf], sizes: &[usize]) -> Result<Vec<bool>> {
    let m: StreamManifest = io::read_json(manifest)?;
    let mut flags = Vec::new();
    for (path, &n) in windows.iter().zip(sizes) {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let entry = m.windows.iter().find(|e| e.file == name).ok_or_else(|| {
            DriftError::InvalidInput(format!("{name} is not listed in {}", manifest.display()))
        })?;
        let mut f = vec![false; n];
        for &r in entry.drifted_rows.as_deref().unwrap_or(&[]) {
            *f.get_mut(r as usize).ok_or_else(|| {
                DriftError::InvalidInput(format!("drifted row {r} beyond {n} rows of {name}"))
            })? = true;
        }
        flags.extend(f);
    }
    Ok(flags)
}

fn explain(a: ExplainArgs) -> Result<()> {
    let loaded = load(&a.bundle)?;
    let bundle = &loaded.bundle;
    let parts: Vec<EmbeddingBatch> = a.window.iter().map(|p| read_embeddings(p)).collect::<Result<_>>()?;
    let sizes: Vec<usize> = parts.iter().map(|b| b.len()).collect();
    let window = EmbeddingBatch::concat(&parts)?;
    let ids: Option<Vec<String>> = match &a.ids {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let ids: Vec<String> = text.lines().map(str::to_string).collect();
            if ids.len() != window.len() {
                return Err(DriftError::Dimension {
                    expected: window.len(),
                    got: ids.len(),
                });
            }
            Some(ids)
        }
        None => None,
    };
    let flags = match &a.manifest {
        Some(m) => Some(drift_flags_from_manifest(m, &a.window, &sizes)?),
        None => None,
    };
    let analysis = match bundle.thresholds.as_ref() {
        Some(t) => match Detector::new(&bundle.baseline, t)?.analyze(&window, 0, None) {
            Ok(r) => Some(r),
            Err(e) => {
                eprintln!("warning: window analysis failed: {e}");
                None
            }
        },
        None => None,
    };
    let config = ExplainConfig {
        k_max: a.k_max,
        top_n: a.top_n,
        seed: a.seed,
        per_label: !a.batch_only,
    };
    let explanation = explain_window(&window, &config)?;
    for s in &explanation.skipped {
        eprintln!("warning: label {} not explained: {}", s.label, s.reason);
    }
    let mut summaries = Vec::new();
    for report in std::iter::once(&explanation.batch).chain(&explanation.labels) {
        let rows: Vec<usize> = match report.scope {
            Scope::Batch => (0..window.len()).collect(),
            Scope::Label(l) => window.rows_with_label(l),
        };
        let c = &report.clustering;
        let (drifted_per_cluster, scope_purity) = match &flags {
            Some(f) => {
                let local: Vec<bool> = rows.iter().map(|&r| f[r]).collect();
                let mut per = vec![0usize; c.k];
                for (&cl, &d) in c.assignment.iter().zip(&local) {
                    per[cl] += d as usize;
                }
                (Some(per), Some(purity(&c.assignment, &local)?))
            }
            None => (None, None),
        };
        summaries.push(ScopeSummary {
            scope: report.scope,
            k: c.k,
            silhouette: c.silhouette,
            cluster_sizes: c.cluster_sizes(),
            drifted_per_cluster,
            purity: scope_purity,
            prototype_ids: ids.as_ref().map(|ids| {
                report
                    .prototypes
                    .iter()
                    .map(|list| list.iter().map(|p| ids[p.index].clone()).collect())
                    .collect()
            }),
        });
    }
    let out = ExplainOutput {
        windows: a.window.iter().map(|p| p.display().to_string()).collect(),
        rows: window.len(),
        analysis,
        summaries,
        explanation,
    };
    write_json(&a.out, &out)?;
    eprintln!(
        "batch: k={} (silhouette {:.3}); {} label scopes; report in {}",
        out.explanation.batch.clustering.k,
        out.explanation.batch.clustering.silhouette,
        out.explanation.labels.len(),
        a.out.display()
    );
    Ok(())
}

fn pattern_from_args(a: &SimulateArgs) -> Result<DriftSchedule> {
    let name = a.pattern.to_ascii_lowercase();
    if name == "constant" {
        return DriftSchedule::constant(a.level.unwrap_or(0.0), a.total.unwrap_or(100));
    }
    let pattern = match name.parse::<Pattern>()? {
        Pattern::Sudden { total, onset, level } => Pattern::Sudden {
            total: a.total.unwrap_or(total),
            onset: a.onset.unwrap_or(onset),
            level: a.level.unwrap_or(level),
        },
        Pattern::Incremental { total, onset, start, step } => Pattern::Incremental {
            total: a.total.unwrap_or(total),
            onset: a.onset.unwrap_or(onset),
            start: a.start.unwrap_or(start),
            step: a.step.unwrap_or(step),
        },
        Pattern::Periodic { total, block, level } => Pattern::Periodic {
            total: a.total.unwrap_or(total),
            block: a.block.unwrap_or(block),
            level: a.level.unwrap_or(level),
        },
    };
    generate_pattern(&pattern)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let schedule = pattern_from_args(&a)?;
    let pools = match (&a.nondrift, &a.drift) {
        (Some(n), Some(d)) => SamplePools::new(read_embeddings(n)?, Some(read_embeddings(d)?))?,
        _ => {
            let source = SynthSource::new(SynthConfig {
                n_labels: a.n_labels,
                dim: a.dim,
                separation: a.separation,
                drift_shift: a.drift_shift,
                ..SynthConfig::default()
            })?;
            if let Some(dir) = &a.training_out {
                std::fs::create_dir_all(dir)?;
                let h = source.sample_nondrift(a.rows_per_label, &mut stream_rng(a.seed, 100));
                let t = source.sample_nondrift(a.rows_per_label, &mut stream_rng(a.seed, 101));
                write_embeddings(&dir.join("historical.dlem"), &h)?;
                write_embeddings(&dir.join("threshold.dlem"), &t)?;
            }
            source.pools(a.rows_per_label, a.seed)?
        }
    };
    let stream = build_stream(&pools, &schedule, a.window_size, a.seed)?;
    let start = match &a.start_time {
        Some(s) => Some(
            chrono::DateTime::parse_from_rfc3339(s)
                .map_err(|e| DriftError::InvalidInput(format!("start time `{s}`: {e}")))?,
        ),
        None => None,
    };
    let meta: Vec<ManifestEntry> = (0..stream.len())
        .map(|i| ManifestEntry {
            timestamp: start.map(|t| {
                (t + chrono::Duration::seconds(a.interval_secs * i as i64))
                    .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
            }),
            truth: Some(stream.truth[i]),
            drift_pct: Some(stream.drift_pct[i]),
            drifted_rows: Some(
                stream.drifted_rows[i]
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d)
                    .map(|(r, _)| r as u32)
                    .collect(),
            ),
            ..ManifestEntry::default()
        })
        .collect();
    let description = format!(
        "{} pattern, {} windows of {} rows, seed {}",
        a.pattern,
        stream.len(),
        a.window_size,
        a.seed
    );
    write_stream_dir(&a.out, &stream.windows, meta, Some(description))?;
    eprintln!("{} windows written to {}", stream.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct EvaluationSummary {
    metric: DistanceKind,
    windows: usize,
    failed_windows: usize,
    accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detection: Option<DetectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spearman: Option<f64>,
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let loaded = load(&a.bundle)?;
    let bundle = &loaded.bundle;
    let thresholds = bundle.thresholds()?;
    let entries = read_stream_dir(&a.stream)?;
    let truth: Vec<bool> = entries
        .iter()
        .map(|e| {
            e.meta
                .truth
                .or(e.meta.drift_pct.map(|d| d > 0.0))
                .ok_or_else(|| {
                    DriftError::InvalidInput(format!("no truth recorded for {}", e.meta.file))
                })
        })
        .collect::<Result<_>>()?;
    let pct: Option<Vec<f64>> = entries.iter().map(|e| e.meta.drift_pct).collect();
    let windows = load_stream_windows(&entries)?;
    let log: MonitorLog = run_stream_windows(&bundle.baseline, thresholds, &windows, &baseline_id(bundle))?;
    let flags = log.batch_flags();
    let correct = flags.iter().zip(&truth).filter(|(f, t)| f == t).count();

    let levels: Vec<SeverityFlags> = match &pct {
        Some(p) => p
            .iter()
            .zip(&flags)
            .map(|(&d, &f)| SeverityFlags { drift_pct: d, flags: vec![f] })
            .collect(),
        None => truth
            .iter()
            .zip(&flags)
            .map(|(&t, &f)| SeverityFlags {
                drift_pct: if t { 100.0 } else { 0.0 },
                flags: vec![f],
            })
            .collect(),
    };
    let detection = evaluate_detection(&levels).ok();
    let spearman = pct.as_ref().and_then(|p| {
        let curve = log.batch_curve();
        let ok: Vec<usize> = (0..curve.len()).filter(|&i| curve[i].is_finite()).collect();
        let x: Vec<f64> = ok.iter().map(|&i| curve[i]).collect();
        let y: Vec<f64> = ok.iter().map(|&i| p[i]).collect();
        spearman_corr(&x, &y).ok()
    });
    render_monitor(&log, &a.out)?;
    let summary = EvaluationSummary {
        metric: log.metric,
        windows: log.len(),
        failed_windows: log.reports().iter().filter(|r| r.is_failed()).count(),
        accuracy: correct as f64 / log.len() as f64,
        detection,
        spearman,
    };
    if let Some(d) = &summary.detection {
        let mut w = csv::Writer::from_writer(Vec::new());
        for l in &d.levels {
            w.serialize(l).map_err(|e| DriftError::Format(format!("csv: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| DriftError::Io(std::io::Error::other(e.to_string())))?;
        io::atomic_write(&a.out.join("accuracy.csv"), &bytes)?;
    }
    write_json(&a.out.join("summary.json"), &summary)?;
    eprintln!(
        "accuracy {:.3}{}{}",
        summary.accuracy,
        summary
            .detection
            .as_ref()
            .map(|d| format!(", H_DD {:.3}", d.h_dd))
            .unwrap_or_default(),
        summary
            .spearman
            .map(|s| format!(", Spearman {s:.3}"))
            .unwrap_or_default()
    );
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let config = BenchConfig {
        window_sizes: a.window_sizes,
        dims: a.dims,
        baseline_rows: a.baseline_rows,
        d_prime: a.d_prime,
        d_prime_label: a.d_prime_label,
        repeats: a.repeats,
        seed: a.seed,
        ..BenchConfig::default()
    };
    let rows = benchmark_runtime(&config)?;
    match &a.out {
        Some(p) => {
            let mut buf = Vec::new();
            write_bench_table(&rows, &mut buf)?;
            io::atomic_write(p, &buf)?;
        }
        None => write_bench_table(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

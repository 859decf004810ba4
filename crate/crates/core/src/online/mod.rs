//! Online phase: score fixed-size windows against the frozen baseline and
//! collect the results in a drift monitor.

mod render;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch::{EmbeddingBatch, LabelId};
use crate::error::{DriftError, RankScope, Result};
use crate::offline::{BaselineModel, BaselineReferences, ThresholdSet};
use crate::stats::gaussian::estimate_gaussian_f32;
use crate::stats::DistanceKind;

pub use render::{read_curve_file, render_monitor, write_curve_file, CurveRow, RenderedMonitor};

/// Outcome for one label within a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub label: LabelId,
    /// `None` when the window had too few rows of this label.
    pub distance: Option<f64>,
    pub drift: bool,
    pub count: usize,
}

impl LabelEntry {
    pub fn is_insufficient(&self) -> bool {
        self.distance.is_none()
    }
}

/// Result of analyzing one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window_id: u64,
    #[serde(default)]
    pub timestamp: Option<String>,
    /// `None` only for windows that could not be analyzed (see `warnings`).
    pub batch_distance: Option<f64>,
    pub batch_drift: bool,
    /// In baseline label-set order.
    pub label_entries: Vec<LabelEntry>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl WindowReport {
    /// Placeholder for a window whose analysis failed.
    pub fn failed(window_id: u64, timestamp: Option<String>, reason: String) -> Self {
        Self {
            window_id,
            timestamp,
            batch_distance: None,
            batch_drift: false,
            label_entries: Vec::new(),
            warnings: vec![reason],
        }
    }

    pub fn is_failed(&self) -> bool {
        self.batch_distance.is_none()
    }

    pub fn label(&self, label: LabelId) -> Option<&LabelEntry> {
        self.label_entries.iter().find(|e| e.label == label)
    }
}

/// Scores windows against one baseline and threshold pair.
pub struct Detector<'a> {
    baseline: &'a BaselineModel,
    thresholds: &'a ThresholdSet,
    refs: BaselineReferences,
}

impl<'a> Detector<'a> {
    pub fn new(baseline: &'a BaselineModel, thresholds: &'a ThresholdSet) -> Result<Self> {
        for l in baseline.label_set() {
            if !thresholds.t_label.contains_key(l) {
                return Err(DriftError::InvalidInput(format!(
                    "threshold set has no entry for label {l}"
                )));
            }
        }
        let refs = BaselineReferences::new(baseline, thresholds.metric)?;
        Ok(Self {
            baseline,
            thresholds,
            refs,
        })
    }

    pub fn metric(&self) -> DistanceKind {
        self.thresholds.metric
    }

    pub fn baseline(&self) -> &BaselineModel {
        self.baseline
    }

    pub fn thresholds(&self) -> &ThresholdSet {
        self.thresholds
    }

    /// Projects the window through the baseline PCAs, fits the window
    /// Gaussians, and compares each distance with its threshold.
    pub fn analyze(
        &self,
        window: &EmbeddingBatch,
        window_id: u64,
        timestamp: Option<String>,
    ) -> Result<WindowReport> {
        let baseline = self.baseline;
        if window.dim() != baseline.input_dim() {
            return Err(DriftError::Dimension {
                expected: baseline.input_dim(),
                got: window.dim(),
            });
        }
        let need = baseline.min_batch_rows();
        if window.len() < need {
            return Err(DriftError::Rank {
                scope: RankScope::Batch,
                count: window.len(),
                required: need,
            });
        }
        let mut warnings = Vec::new();
        let m_w = self.thresholds.window_size;
        if window.len() < m_w {
            warnings.push(format!(
                "short window: {} rows (window size {m_w})",
                window.len()
            ));
        } else if window.len() > m_w {
            warnings.push(format!(
                "oversized window: {} rows (window size {m_w})",
                window.len()
            ));
        }

        let vectors = window.vectors();
        let reduced = baseline.batch_pca().project_embeddings_f32(vectors, None)?;
        let batch_distance = self.refs.batch_distance(&estimate_gaussian_f32(&reduced)?)?;

        let n_labels = baseline.label_set().len();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
        let mut unknown = 0usize;
        for (i, &l) in window.labels().iter().enumerate() {
            match baseline.label_index(l) {
                Some(pos) => rows[pos].push(i),
                None => unknown += 1,
            }
        }
        if unknown > 0 {
            warnings.push(format!(
                "{unknown} rows carry labels outside the baseline label set and were excluded from per-label analysis"
            ));
        }

        let min_rows = baseline.min_label_rows();
        let mut label_entries = Vec::with_capacity(n_labels);
        for (pos, model) in baseline.label_models().iter().enumerate() {
            let idx = &rows[pos];
            let distance = if idx.len() >= min_rows {
                let reduced = model.pca.project_embeddings_f32(vectors, Some(idx))?;
                let g = estimate_gaussian_f32(&reduced)?;
                match self.refs.label_distance(pos, &g) {
                    Ok(d) => Some(d),
                    Err(e) => {
                        warnings.push(format!("label {}: {e}", model.label));
                        None
                    }
                }
            } else {
                None
            };
            let t = self.thresholds.label_threshold(model.label);
            label_entries.push(LabelEntry {
                label: model.label,
                distance,
                drift: distance.is_some_and(|d| d > t),
                count: idx.len(),
            });
        }

        Ok(WindowReport {
            window_id,
            timestamp,
            batch_distance: Some(batch_distance),
            batch_drift: batch_distance > self.thresholds.t_batch,
            label_entries,
            warnings,
        })
    }
}

/// One-shot analysis of a single window (window id 0, no timestamp).
pub fn analyze_window(
    baseline: &BaselineModel,
    thresholds: &ThresholdSet,
    window: &EmbeddingBatch,
) -> Result<WindowReport> {
    Detector::new(baseline, thresholds)?.analyze(window, 0, None)
}

/// Append-only sequence of window reports from one baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorLog {
    pub baseline_id: String,
    pub metric: DistanceKind,
    pub label_set: Vec<LabelId>,
    #[serde(with = "crate::io::nonfinite")]
    pub t_batch: f64,
    #[serde(with = "crate::io::nonfinite::vec")]
    pub t_label: Vec<f64>,
    reports: Vec<WindowReport>,
}

impl MonitorLog {
    pub fn new(baseline_id: impl Into<String>, baseline: &BaselineModel, thresholds: &ThresholdSet) -> Self {
        Self {
            baseline_id: baseline_id.into(),
            metric: thresholds.metric,
            label_set: baseline.label_set().to_vec(),
            t_batch: thresholds.t_batch,
            t_label: baseline
                .label_set()
                .iter()
                .map(|&l| thresholds.label_threshold(l))
                .collect(),
            reports: Vec::new(),
        }
    }

    /// Appends a report; window ids must be strictly increasing.
    pub fn push(&mut self, report: WindowReport) -> Result<()> {
        if let Some(last) = self.reports.last() {
            if report.window_id <= last.window_id {
                return Err(DriftError::InvalidInput(format!(
                    "window id {} does not follow {}",
                    report.window_id, last.window_id
                )));
            }
        }
        self.reports.push(report);
        Ok(())
    }

    pub fn reports(&self) -> &[WindowReport] {
        &self.reports
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    /// Per-batch distances (NaN for failed windows).
    pub fn batch_curve(&self) -> Vec<f64> {
        self.reports
            .iter()
            .map(|r| r.batch_distance.unwrap_or(f64::NAN))
            .collect()
    }

    pub fn batch_flags(&self) -> Vec<bool> {
        self.reports.iter().map(|r| r.batch_drift).collect()
    }
}

/// Window of a stream with optional metadata.
#[derive(Debug, Clone)]
pub struct StreamWindow {
    pub batch: EmbeddingBatch,
    pub timestamp: Option<String>,
}

/// Analyzes `windows` in order (ids starting at 1). Windows are scored in
/// parallel and committed in order; a window that fails is recorded as a
/// failed report rather than aborting the run.
pub fn run_stream(
    baseline: &BaselineModel,
    thresholds: &ThresholdSet,
    windows: &[EmbeddingBatch],
) -> Result<MonitorLog> {
    let windows: Vec<StreamWindow> = windows
        .iter()
        .map(|b| StreamWindow {
            batch: b.clone(),
            timestamp: None,
        })
        .collect();
    run_stream_windows(baseline, thresholds, &windows, "baseline")
}

/// [`run_stream`] over windows carrying timestamps.
pub fn run_stream_windows(
    baseline: &BaselineModel,
    thresholds: &ThresholdSet,
    windows: &[StreamWindow],
    baseline_id: &str,
) -> Result<MonitorLog> {
    let detector = Detector::new(baseline, thresholds)?;
    let reports: Vec<WindowReport> = windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let id = i as u64 + 1;
            detector
                .analyze(&w.batch, id, w.timestamp.clone())
                .unwrap_or_else(|e| WindowReport::failed(id, w.timestamp.clone(), e.to_string()))
        })
        .collect();
    let mut log = MonitorLog::new(baseline_id, baseline, thresholds);
    for r in reports {
        log.push(r)?;
    }
    Ok(log)
}

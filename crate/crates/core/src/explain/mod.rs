//! Drift explanation: cluster a window's embeddings (whole window and per
//! label), report the samples nearest each centroid as prototypes, and
//! measure how well the clusters separate drifted from non-drifted rows.

pub mod kmeans;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::batch::{EmbeddingBatch, LabelId};
use crate::error::{DriftError, Result};
use crate::rng::derive_seed;

pub use kmeans::{cluster_select, kmeans, silhouette, ClusteringResult, KMeansRun, KTrial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "label")]
pub enum Scope {
    Batch,
    Label(LabelId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    /// Row index in the explained window.
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub scope: Scope,
    pub clustering: ClusteringResult,
    /// Per cluster, nearest members first.
    pub prototypes: Vec<Vec<Prototype>>,
}

impl ExplanationReport {
    /// Rewrites prototype indices through `rows` (local index → window row).
    fn remap(mut self, rows: &[usize]) -> Self {
        for list in &mut self.prototypes {
            for p in list {
                p.index = rows[p.index];
            }
        }
        self
    }
}

/// The `top_n` members of each cluster nearest its centroid (Euclidean),
/// ascending; smaller clusters return all their members.
pub fn extract_prototypes(
    rows: &DMatrix<f64>,
    clustering: &ClusteringResult,
    top_n: usize,
) -> ExplanationReport {
    let mut members: Vec<Vec<Prototype>> = vec![Vec::new(); clustering.k];
    for (i, &c) in clustering.assignment.iter().enumerate() {
        let distance = (rows.row(i) - clustering.centroids.row(c)).norm();
        members[c].push(Prototype { index: i, distance });
    }
    for list in &mut members {
        list.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
        list.truncate(top_n);
    }
    ExplanationReport {
        scope: Scope::Batch,
        clustering: clustering.clone(),
        prototypes: members,
    }
}

/// Fraction of samples whose cluster majority (drifted or not) matches
/// their own category.
pub fn purity(assignment: &[usize], drift_flags: &[bool]) -> Result<f64> {
    if assignment.len() != drift_flags.len() {
        return Err(DriftError::Dimension {
            expected: assignment.len(),
            got: drift_flags.len(),
        });
    }
    if assignment.is_empty() {
        return Err(DriftError::InvalidInput("purity of an empty assignment".into()));
    }
    let k = assignment.iter().max().unwrap() + 1;
    let mut counts = vec![[0usize; 2]; k];
    for (&c, &f) in assignment.iter().zip(drift_flags) {
        counts[c][f as usize] += 1;
    }
    let majority: usize = counts.iter().map(|c| c[0].max(c[1])).sum();
    Ok(majority as f64 / assignment.len() as f64)
}

/// Settings for [`explain_window`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplainConfig {
    pub k_max: usize,
    pub top_n: usize,
    pub seed: u64,
    pub per_label: bool,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            k_max: 10,
            top_n: 5,
            seed: 0,
            per_label: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedScope {
    pub label: LabelId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowExplanation {
    pub rows: usize,
    pub batch: ExplanationReport,
    pub labels: Vec<ExplanationReport>,
    #[serde(default)]
    pub skipped: Vec<SkippedScope>,
}

impl WindowExplanation {
    pub fn label(&self, label: LabelId) -> Option<&ExplanationReport> {
        self.labels.iter().find(|r| r.scope == Scope::Label(label))
    }
}

fn explain_rows(
    rows: &DMatrix<f64>,
    k_max: usize,
    top_n: usize,
    seed: u64,
) -> Result<ExplanationReport> {
    let clustering = cluster_select(rows, k_max, seed)?;
    Ok(extract_prototypes(rows, &clustering, top_n))
}

/// Clusters the raw embeddings of `window` (one or several concatenated
/// windows) for the whole batch and, optionally, for each label. Labels
/// with too few rows or no spread are listed in `skipped`.
pub fn explain_window(window: &EmbeddingBatch, config: &ExplainConfig) -> Result<WindowExplanation> {
    if config.top_n == 0 {
        return Err(DriftError::InvalidInput("top_n must be positive".into()));
    }
    let all = window.to_f64();
    let batch = explain_rows(&all, config.k_max, config.top_n, config.seed)?;
    let mut labels = Vec::new();
    let mut skipped = Vec::new();
    if config.per_label {
        for label in window.label_set() {
            let idx = window.rows_with_label(label);
            if idx.len() < 2 {
                skipped.push(SkippedScope {
                    label,
                    reason: format!("{} rows", idx.len()),
                });
                continue;
            }
            let rows = all.select_rows(&idx);
            let k_max = config.k_max.min(idx.len());
            match explain_rows(&rows, k_max, config.top_n, derive_seed(config.seed, label as u64)) {
                Ok(mut r) => {
                    r.scope = Scope::Label(label);
                    labels.push(r.remap(&idx));
                }
                Err(e @ (DriftError::DegenerateData(_) | DriftError::InvalidK(_))) => {
                    skipped.push(SkippedScope {
                        label,
                        reason: e.to_string(),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(WindowExplanation {
        rows: window.len(),
        batch,
        labels,
        skipped,
    })
}

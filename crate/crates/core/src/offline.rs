//! Offline phase: fit the baseline distributions on historical embeddings,
//! then estimate per-batch and per-label drift thresholds by resampling
//! windows from a threshold dataset.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch::{EmbeddingBatch, LabelId};
use crate::error::{DriftError, RankScope, Result};
use crate::rng::stream_rng;
use crate::stats::{
    estimate_gaussian, estimate_gaussian_rows, fit_pca_embeddings, DistanceKind, GaussianSummary,
    PcaProjector, PreparedReference,
};

const PROJECT_CHUNK_ROWS: usize = 16_384;

/// Parameters of the offline phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineConfig {
    /// Per-batch PCA dimensionality.
    pub d_prime: usize,
    /// Per-label PCA dimensionality.
    pub d_prime_label: usize,
    /// Number of windows resampled for threshold estimation.
    pub n_th: usize,
    /// Fraction of the largest resampled distances discarded before taking
    /// the maximum. Higher values give lower thresholds.
    pub t_alpha: f64,
    /// Online window size.
    pub window_size: usize,
    pub seed: u64,
    /// Declared label set. Defaults to the labels present in the historical
    /// data.
    #[serde(default)]
    pub labels: Option<Vec<LabelId>>,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        Self {
            d_prime: 150,
            d_prime_label: 75,
            n_th: 10_000,
            t_alpha: 0.01,
            window_size: 1000,
            seed: 0,
            labels: None,
        }
    }
}

impl OfflineConfig {
    /// Checks ranges; `input_dim` additionally bounds the PCA sizes.
    pub fn validate(&self, input_dim: Option<usize>) -> Result<()> {
        let bad = |msg: String| Err(DriftError::InvalidInput(msg));
        if self.d_prime == 0 || self.d_prime_label == 0 {
            return bad("d_prime and d_prime_label must be positive".into());
        }
        if let Some(d) = input_dim {
            if self.d_prime > d || self.d_prime_label > d {
                return bad(format!(
                    "d_prime ({}) and d_prime_label ({}) must not exceed the embedding width {d}",
                    self.d_prime, self.d_prime_label
                ));
            }
        }
        if self.n_th == 0 {
            return bad("n_th must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.t_alpha) {
            return bad(format!("t_alpha must lie in [0, 1), got {}", self.t_alpha));
        }
        if self.window_size < 2 {
            return bad(format!("window size must be at least 2, got {}", self.window_size));
        }
        if let Some(labels) = &self.labels {
            if labels.is_empty() {
                return bad("declared label set is empty".into());
            }
            let mut sorted = labels.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != labels.len() {
                return bad("declared label set has duplicates".into());
            }
        }
        Ok(())
    }
}

/// Reduction and Gaussian for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelModel {
    pub label: LabelId,
    pub pca: PcaProjector,
    pub gaussian: GaussianSummary,
}

/// The frozen no-drift reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    label_set: Vec<LabelId>,
    batch_pca: PcaProjector,
    batch_gaussian: GaussianSummary,
    labels: Vec<LabelModel>,
    config: OfflineConfig,
}

impl BaselineModel {
    pub fn label_set(&self) -> &[LabelId] {
        &self.label_set
    }

    pub fn input_dim(&self) -> usize {
        self.batch_pca.input_dim()
    }

    pub fn batch_pca(&self) -> &PcaProjector {
        &self.batch_pca
    }

    pub fn batch_gaussian(&self) -> &GaussianSummary {
        &self.batch_gaussian
    }

    /// Per-label models in label-set order.
    pub fn label_models(&self) -> &[LabelModel] {
        &self.labels
    }

    pub fn label_model(&self, label: LabelId) -> Option<&LabelModel> {
        self.label_index(label).map(|i| &self.labels[i])
    }

    pub fn label_index(&self, label: LabelId) -> Option<usize> {
        self.label_set.iter().position(|&l| l == label)
    }

    pub fn config(&self) -> &OfflineConfig {
        &self.config
    }

    /// Rows needed for a per-batch Gaussian of full rank.
    pub fn min_batch_rows(&self) -> usize {
        self.batch_pca.k() + 1
    }

    /// Rows of one label needed for a per-label Gaussian of full rank.
    pub fn min_label_rows(&self) -> usize {
        self.config.d_prime_label + 1
    }
}

/// Projects `rows` (or a subset) in bounded chunks.
pub(crate) fn project_all(
    pca: &PcaProjector,
    rows: &DMatrix<f32>,
    subset: Option<&[usize]>,
) -> Result<DMatrix<f64>> {
    let n = subset.map_or(rows.nrows(), <[usize]>::len);
    if n <= PROJECT_CHUNK_ROWS {
        return pca.project_embeddings(rows, subset);
    }
    let all: Vec<usize>;
    let idx = match subset {
        Some(s) => s,
        None => {
            all = (0..n).collect();
            &all
        }
    };
    let mut out = DMatrix::<f64>::zeros(n, pca.k());
    for start in (0..n).step_by(PROJECT_CHUNK_ROWS) {
        let len = PROJECT_CHUNK_ROWS.min(n - start);
        let part = pca.project_embeddings(rows, Some(&idx[start..start + len]))?;
        out.rows_mut(start, len).copy_from(&part);
    }
    Ok(out)
}

fn rescope(err: DriftError, scope: RankScope) -> DriftError {
    match err {
        DriftError::Rank {
            count, required, ..
        } => DriftError::Rank {
            scope,
            count,
            required,
        },
        other => other,
    }
}

/// Fits the per-batch and per-label PCAs and Gaussians on historical data.
///
/// Only the predicted labels are used; ground truth never enters the fit.
pub fn fit_baseline(historical: &EmbeddingBatch, config: &OfflineConfig) -> Result<BaselineModel> {
    config.validate(Some(historical.dim()))?;
    let m_b = historical.len();
    let need_batch = config.d_prime + 1;
    if m_b < need_batch {
        return Err(DriftError::Rank {
            scope: RankScope::Batch,
            count: m_b,
            required: need_batch,
        });
    }
    let label_set = match &config.labels {
        Some(l) => l.clone(),
        None => historical.label_set(),
    };

    let need_label = config.d_prime_label + 1;
    let mut groups = Vec::with_capacity(label_set.len());
    for &label in &label_set {
        let rows = historical.rows_with_label(label);
        if rows.is_empty() {
            return Err(DriftError::EmptyLabel(label));
        }
        if rows.len() < need_label {
            return Err(DriftError::Rank {
                scope: RankScope::Label(label),
                count: rows.len(),
                required: need_label,
            });
        }
        groups.push((label, rows));
    }

    let vectors = historical.vectors();
    let batch_pca = fit_pca_embeddings(vectors, None, config.d_prime)
        .map_err(|e| rescope(e, RankScope::Batch))?;
    let reduced = project_all(&batch_pca, vectors, None)?;
    let batch_gaussian = estimate_gaussian(&reduced)?;

    let labels = groups
        .into_iter()
        .map(|(label, rows)| {
            let scope = RankScope::Label(label);
            let pca = fit_pca_embeddings(vectors, Some(&rows), config.d_prime_label)
                .map_err(|e| rescope(e, scope))?;
            let reduced = project_all(&pca, vectors, Some(&rows))?;
            let gaussian = estimate_gaussian(&reduced)?;
            Ok(LabelModel {
                label,
                pca,
                gaussian,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BaselineModel {
        label_set,
        batch_pca,
        batch_gaussian,
        labels,
        config: config.clone(),
    })
}

/// The baseline Gaussians prepared for repeated distance evaluation.
pub struct BaselineReferences {
    batch: PreparedReference,
    labels: Vec<PreparedReference>,
}

impl BaselineReferences {
    pub fn new(baseline: &BaselineModel, metric: DistanceKind) -> Result<Self> {
        let batch = PreparedReference::new(metric, baseline.batch_gaussian.clone())?;
        let labels = baseline
            .labels
            .iter()
            .map(|m| PreparedReference::new(metric, m.gaussian.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { batch, labels })
    }

    pub fn metric(&self) -> DistanceKind {
        self.batch.kind()
    }

    pub fn batch_distance(&self, window: &GaussianSummary) -> Result<f64> {
        self.batch.distance_to(window)
    }

    /// Distance for the label at position `index` of the label set.
    pub fn label_distance(&self, index: usize, window: &GaussianSummary) -> Result<f64> {
        self.labels[index].distance_to(window)
    }
}

/// Drift thresholds for the per-batch and per-label distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    #[serde(with = "crate::io::nonfinite")]
    pub t_batch: f64,
    /// `+∞` for labels too rare to estimate.
    #[serde(with = "crate::io::nonfinite::map")]
    pub t_label: BTreeMap<LabelId, f64>,
    pub n_th: usize,
    pub t_alpha: f64,
    pub window_size: usize,
    pub metric: DistanceKind,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ThresholdSet {
    /// Threshold of `label`; unknown labels never drift.
    pub fn label_threshold(&self, label: LabelId) -> f64 {
        self.t_label.get(&label).copied().unwrap_or(f64::INFINITY)
    }
}

/// Number of top distances discarded for sensitivity `t_alpha` out of `n`.
pub fn trim_count(t_alpha: f64, n: usize) -> usize {
    // the epsilon keeps products like 0.29 · 100 from rounding down
    ((t_alpha * n as f64) + 1e-9).floor() as usize
}

/// Sorts `distances` descending, drops the `trim_count` largest and returns
/// the largest remaining one.
pub fn threshold_from_distances(distances: &[f64], t_alpha: f64) -> Option<f64> {
    if distances.is_empty() {
        return None;
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let trim = trim_count(t_alpha, sorted.len()).min(sorted.len() - 1);
    Some(sorted[trim])
}

/// Distances of the resampled threshold windows, before trimming.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSamples {
    pub batch: Vec<f64>,
    /// Per label (label-set order), the distances of the windows in which
    /// the label had enough rows.
    pub labels: Vec<Vec<f64>>,
    pub label_failures: Vec<usize>,
}

/// A threshold dataset projected once through every baseline PCA, so that
/// resampled windows only need to gather reduced rows.
pub(crate) struct ProjectedPool {
    batch: DMatrix<f64>,
    labels: Vec<DMatrix<f64>>,
    /// For each pool row, `(label position, row in labels[pos])`.
    slot: Vec<Option<(usize, usize)>>,
}

impl ProjectedPool {
    pub(crate) fn new(baseline: &BaselineModel, pool: &EmbeddingBatch) -> Result<Self> {
        if pool.dim() != baseline.input_dim() {
            return Err(DriftError::Dimension {
                expected: baseline.input_dim(),
                got: pool.dim(),
            });
        }
        let vectors = pool.vectors();
        let batch = project_all(&baseline.batch_pca, vectors, None)?;
        let mut slot = vec![None; pool.len()];
        let mut labels = Vec::with_capacity(baseline.labels.len());
        for (pos, model) in baseline.labels.iter().enumerate() {
            let rows = pool.rows_with_label(model.label);
            for (local, &r) in rows.iter().enumerate() {
                slot[r] = Some((pos, local));
            }
            labels.push(if rows.is_empty() {
                DMatrix::zeros(0, model.pca.k())
            } else {
                project_all(&model.pca, vectors, Some(&rows))?
            });
        }
        Ok(Self {
            batch,
            labels,
            slot,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.batch.nrows()
    }

    /// Batch distance and per-label distances (`None` when a label has too
    /// few rows, or its distance failed) of the window made of `rows`.
    pub(crate) fn score(
        &self,
        refs: &BaselineReferences,
        min_label_rows: usize,
        rows: &[usize],
    ) -> Result<(f64, Vec<Option<std::result::Result<f64, DriftError>>>)> {
        let g = estimate_gaussian_rows(&self.batch, rows)?;
        let batch = refs.batch_distance(&g)?;
        let mut per_label: Vec<Vec<usize>> = vec![Vec::new(); self.labels.len()];
        for &r in rows {
            if let Some((pos, local)) = self.slot[r] {
                per_label[pos].push(local);
            }
        }
        let labels = per_label
            .iter()
            .enumerate()
            .map(|(pos, local)| {
                (local.len() >= min_label_rows).then(|| {
                    estimate_gaussian_rows(&self.labels[pos], local)
                        .and_then(|g| refs.label_distance(pos, &g))
                })
            })
            .collect();
        Ok((batch, labels))
    }
}

/// Resamples `n_th` windows of `window_size` rows, with replacement, from
/// `threshold_data` and scores each against the baseline.
///
/// Window `i` draws from its own generator derived from `(seed, i)`, so the
/// result does not depend on how the windows are scheduled.
pub fn sample_threshold_distances(
    baseline: &BaselineModel,
    threshold_data: &EmbeddingBatch,
    metric: DistanceKind,
    config: &OfflineConfig,
) -> Result<ThresholdSamples> {
    config.validate(None)?;
    if threshold_data.len() < config.window_size {
        return Err(DriftError::InsufficientData(format!(
            "threshold data has {} rows, window size is {}",
            threshold_data.len(),
            config.window_size
        )));
    }
    let refs = BaselineReferences::new(baseline, metric)?;
    let pool = ProjectedPool::new(baseline, threshold_data)?;
    let n_pool = pool.len();
    let min_label_rows = baseline.min_label_rows();

    let scored = (0..config.n_th)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream_rng(config.seed, w as u64);
            let rows: Vec<usize> = (0..config.window_size)
                .map(|_| rng.random_range(0..n_pool))
                .collect();
            pool.score(&refs, min_label_rows, &rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let n_labels = baseline.labels.len();
    let mut batch = Vec::with_capacity(scored.len());
    let mut labels = vec![Vec::new(); n_labels];
    let mut label_failures = vec![0usize; n_labels];
    for (b, per_label) in scored {
        batch.push(b);
        for (pos, d) in per_label.into_iter().enumerate() {
            match d {
                Some(Ok(v)) => labels[pos].push(v),
                Some(Err(_)) => label_failures[pos] += 1,
                None => {}
            }
        }
    }
    Ok(ThresholdSamples {
        batch,
        labels,
        label_failures,
    })
}

/// Estimates the per-batch threshold `T` and per-label thresholds `T_l`.
///
/// Labels that never reach `d'_l + 1` rows in any sampled window get an
/// infinite threshold and a warning.
pub fn estimate_thresholds(
    baseline: &BaselineModel,
    threshold_data: &EmbeddingBatch,
    metric: DistanceKind,
    config: &OfflineConfig,
) -> Result<ThresholdSet> {
    let samples = sample_threshold_distances(baseline, threshold_data, metric, config)?;
    Ok(thresholds_from_samples(baseline, &samples, metric, config))
}

/// Applies the trimming rule to already sampled distances.
pub fn thresholds_from_samples(
    baseline: &BaselineModel,
    samples: &ThresholdSamples,
    metric: DistanceKind,
    config: &OfflineConfig,
) -> ThresholdSet {
    let t_batch = threshold_from_distances(&samples.batch, config.t_alpha)
        .expect("n_th >= 1 guarantees at least one batch distance");
    let mut warnings = Vec::new();
    let mut t_label = BTreeMap::new();
    for (pos, &label) in baseline.label_set.iter().enumerate() {
        let t = match threshold_from_distances(&samples.labels[pos], config.t_alpha) {
            Some(t) => t,
            None => {
                warnings.push(format!(
                    "label {label} never reached {} rows in a sampled window; its threshold is infinite",
                    baseline.min_label_rows()
                ));
                f64::INFINITY
            }
        };
        if samples.label_failures[pos] > 0 {
            warnings.push(format!(
                "label {label}: distance failed in {} sampled windows",
                samples.label_failures[pos]
            ));
        }
        t_label.insert(label, t);
    }
    ThresholdSet {
        t_batch,
        t_label,
        n_th: config.n_th,
        t_alpha: config.t_alpha,
        window_size: config.window_size,
        metric,
        warnings,
    }
}

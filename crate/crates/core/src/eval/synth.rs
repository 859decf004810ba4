//! Synthetic embeddings: a mixture of isotropic Gaussians, one per label,
//! plus a drift component displaced from one of them.
//!
//! Label means sit on a regular simplex (`mean_l = separation / √2 · e_l`, so
//! every pair is `separation` apart). The drift component sits at
//! `mean_host + drift_shift · σ · u`, with `u` pointing from the mixture
//! centroid towards the host, which keeps the host as the nearest label.
//! Every row is labelled by its nearest label mean, as a classifier would.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::batch::{EmbeddingBatch, LabelId};
use crate::error::{DriftError, Result};
use crate::eval::SamplePools;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_labels: usize,
    pub dim: usize,
    /// Distance between label means, in units of σ.
    pub separation: f64,
    pub sigma: f64,
    /// Distance of the drift component from its host mean, in units of σ.
    pub drift_shift: f64,
    pub drift_host: LabelId,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_labels: 3,
            dim: 256,
            separation: 4.0,
            sigma: 1.0,
            drift_shift: 8.0,
            drift_host: 0,
        }
    }
}

/// Sampler for the synthetic mixture.
#[derive(Debug, Clone)]
pub struct SynthSource {
    config: SynthConfig,
    means: Vec<DVector<f64>>,
    drift_mean: DVector<f64>,
}

impl SynthSource {
    pub fn new(config: SynthConfig) -> Result<Self> {
        let SynthConfig {
            n_labels,
            dim,
            separation,
            sigma,
            drift_shift,
            drift_host,
        } = config;
        if n_labels < 2 {
            return Err(DriftError::InvalidInput("need at least two labels".into()));
        }
        if dim < n_labels {
            return Err(DriftError::InvalidInput(format!(
                "dimension {dim} cannot hold {n_labels} label means"
            )));
        }
        if !(separation > 0.0 && sigma > 0.0) || !separation.is_finite() || !sigma.is_finite() {
            return Err(DriftError::InvalidInput("separation and sigma must be positive".into()));
        }
        if !(drift_shift >= 0.0) || !drift_shift.is_finite() {
            return Err(DriftError::InvalidInput("drift_shift must be ≥ 0".into()));
        }
        if drift_host as usize >= n_labels {
            return Err(DriftError::InvalidInput(format!(
                "drift host {drift_host} is not one of {n_labels} labels"
            )));
        }
        let scale = separation * sigma / std::f64::consts::SQRT_2;
        let means: Vec<DVector<f64>> = (0..n_labels)
            .map(|l| {
                let mut m = DVector::zeros(dim);
                m[l] = scale;
                m
            })
            .collect();
        let centroid = means.iter().fold(DVector::zeros(dim), |a, m| a + m) / n_labels as f64;
        let host = &means[drift_host as usize];
        let u = (host - &centroid).normalize();
        let drift_mean = host + u * (drift_shift * sigma);
        Ok(Self {
            config,
            means,
            drift_mean,
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn label_means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn drift_mean(&self) -> &DVector<f64> {
        &self.drift_mean
    }

    fn nearest_label(&self, row: &[f64]) -> LabelId {
        let mut best = (f64::INFINITY, 0);
        for (l, m) in self.means.iter().enumerate() {
            let d: f64 = row.iter().zip(m.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, l);
            }
        }
        best.1 as LabelId
    }

    fn draw<R: Rng>(&self, centers: &[&DVector<f64>], rng: &mut R) -> EmbeddingBatch {
        let d = self.config.dim;
        let n = centers.len();
        let mut data = vec![0f32; n * d];
        let mut labels = Vec::with_capacity(n);
        let mut row = vec![0f64; d];
        for (i, c) in centers.iter().enumerate() {
            for j in 0..d {
                let z: f64 = StandardNormal.sample(rng);
                row[j] = c[j] + self.config.sigma * z;
            }
            labels.push(self.nearest_label(&row));
            for j in 0..d {
                data[i * d + j] = row[j] as f32;
            }
        }
        EmbeddingBatch::new(DMatrix::from_row_slice(n, d, &data), labels)
            .expect("synthetic rows are finite")
    }

    /// `per_label` rows from every label component (component order).
    pub fn sample_nondrift<R: Rng>(&self, per_label: usize, rng: &mut R) -> EmbeddingBatch {
        let centers: Vec<&DVector<f64>> = self
            .means
            .iter()
            .flat_map(|m| std::iter::repeat_n(m, per_label))
            .collect();
        self.draw(&centers, rng)
    }

    /// `n` rows from the drift component.
    pub fn sample_drift<R: Rng>(&self, n: usize, rng: &mut R) -> EmbeddingBatch {
        self.draw(&vec![&self.drift_mean; n], rng)
    }

    /// Nondrift and drift pools of `rows_per_label` rows per component,
    /// drawn from independent streams of `seed`.
    pub fn pools(&self, rows_per_label: usize, seed: u64) -> Result<SamplePools> {
        if rows_per_label == 0 {
            return Err(DriftError::InvalidInput("rows_per_label must be positive".into()));
        }
        let nondrift = self.sample_nondrift(rows_per_label, &mut stream_rng(seed, 0));
        let drift = self.sample_drift(rows_per_label, &mut stream_rng(seed, 1));
        SamplePools::new(nondrift, Some(drift))
    }
}

/// Pools from [`SynthConfig::default`] with the given shape.
pub fn synth_pools(
    n_labels: usize,
    d: usize,
    rows_per_label: usize,
    drift_shift: f64,
    seed: u64,
) -> Result<SamplePools> {
    SynthSource::new(SynthConfig {
        n_labels,
        dim: d,
        drift_shift,
        ..SynthConfig::default()
    })?
    .pools(rows_per_label, seed)
}

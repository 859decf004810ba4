//! Stream simulation: windows mixing label-balanced nondrift rows with a
//! scheduled fraction of drift rows, sampled with replacement.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::batch::{EmbeddingBatch, LabelId};
use crate::error::{DriftError, Result};
use crate::eval::DriftSchedule;
use crate::rng::stream_rng;

/// Rows the simulated stream draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePools {
    pub nondrift: EmbeddingBatch,
    /// `None` for a stream that can only produce clean windows.
    pub drift: Option<EmbeddingBatch>,
}

impl SamplePools {
    pub fn new(nondrift: EmbeddingBatch, drift: Option<EmbeddingBatch>) -> Result<Self> {
        if let Some(d) = &drift {
            if d.dim() != nondrift.dim() {
                return Err(DriftError::Dimension {
                    expected: nondrift.dim(),
                    got: d.dim(),
                });
            }
        }
        Ok(Self { nondrift, drift })
    }

    pub fn dim(&self) -> usize {
        self.nondrift.dim()
    }
}

/// Number of drift rows in a window of `m_w` rows at `drift_pct` percent.
pub fn drift_rows(drift_pct: f64, m_w: usize) -> usize {
    ((drift_pct * m_w as f64 / 100.0).round() as usize).min(m_w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedStream {
    pub windows: Vec<EmbeddingBatch>,
    pub drift_pct: Vec<f64>,
    /// Window-level ground truth (`drift_pct > 0`).
    pub truth: Vec<bool>,
    /// Per window, which rows came from the drift pool.
    pub drifted_rows: Vec<Vec<bool>>,
}

impl SimulatedStream {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Splits `total` rows over `n` labels as evenly as possible; the labels
/// receiving the remainder are chosen at random.
fn balanced_counts<R: Rng>(total: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let mut counts = vec![total / n; n];
    for i in sample(rng, n, total % n) {
        counts[i] += 1;
    }
    counts
}

/// One window: drift rows first drawn, then the balanced remainder, then
/// shuffled. Returns the batch and its drift mask.
pub fn sample_window<R: Rng>(
    pools: &SamplePools,
    by_label: &[(LabelId, Vec<usize>)],
    drift_pct: f64,
    m_w: usize,
    rng: &mut R,
) -> Result<(EmbeddingBatch, Vec<bool>)> {
    let n_drift = drift_rows(drift_pct, m_w);
    let mut picks: Vec<(bool, usize)> = Vec::with_capacity(m_w);
    if n_drift > 0 {
        let drift = pools.drift.as_ref().ok_or_else(|| {
            DriftError::InsufficientData(format!(
                "schedule needs drift rows ({drift_pct}%) but the drift pool is empty"
            ))
        })?;
        picks.extend((0..n_drift).map(|_| (true, rng.random_range(0..drift.len()))));
    }
    let counts = balanced_counts(m_w - n_drift, by_label.len(), rng);
    for ((_, rows), &c) in by_label.iter().zip(&counts) {
        picks.extend((0..c).map(|_| (false, rows[rng.random_range(0..rows.len())])));
    }
    picks.shuffle(rng);

    let d = pools.dim();
    let mut vectors = nalgebra::DMatrix::<f32>::zeros(m_w, d);
    let mut labels = Vec::with_capacity(m_w);
    let mut mask = Vec::with_capacity(m_w);
    for (i, &(drifted, r)) in picks.iter().enumerate() {
        let src = if drifted {
            pools.drift.as_ref().unwrap()
        } else {
            &pools.nondrift
        };
        vectors.set_row(i, &src.vectors().row(r));
        labels.push(src.labels()[r]);
        mask.push(drifted);
    }
    Ok((EmbeddingBatch::new(vectors, labels)?, mask))
}

fn label_groups(batch: &EmbeddingBatch) -> Vec<(LabelId, Vec<usize>)> {
    batch
        .label_set()
        .into_iter()
        .map(|l| (l, batch.rows_with_label(l)))
        .collect()
}

/// Builds one window per schedule entry. Window `i` uses its own generator
/// derived from `(seed, i)`.
pub fn build_stream(
    pools: &SamplePools,
    schedule: &DriftSchedule,
    m_w: usize,
    seed: u64,
) -> Result<SimulatedStream> {
    if m_w == 0 {
        return Err(DriftError::InvalidInput("window size must be positive".into()));
    }
    let groups = label_groups(&pools.nondrift);
    let mut out = SimulatedStream {
        windows: Vec::with_capacity(schedule.len()),
        drift_pct: schedule.values().to_vec(),
        truth: schedule.truth(),
        drifted_rows: Vec::with_capacity(schedule.len()),
    };
    for (i, &pct) in schedule.values().iter().enumerate() {
        let mut rng = stream_rng(seed, i as u64);
        let (w, mask) = sample_window(pools, &groups, pct, m_w, &mut rng)?;
        out.windows.push(w);
        out.drifted_rows.push(mask);
    }
    Ok(out)
}

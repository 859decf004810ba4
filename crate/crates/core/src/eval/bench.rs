//! Wall-clock cost of analyzing one window.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{DriftError, Result};
use crate::eval::{SynthConfig, SynthSource};
use crate::offline::{fit_baseline, BaselineModel, OfflineConfig, ThresholdSet};
use crate::online::Detector;
use crate::rng::stream_rng;
use crate::stats::DistanceKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub window_sizes: Vec<usize>,
    pub dims: Vec<usize>,
    /// Historical rows the baseline is fitted on.
    pub baseline_rows: Vec<usize>,
    pub d_prime: usize,
    pub d_prime_label: usize,
    pub n_labels: usize,
    pub repeats: usize,
    pub metric: DistanceKind,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            window_sizes: vec![1000, 5000, 10_000],
            dims: vec![256, 768, 1000],
            baseline_rows: vec![5000],
            d_prime: 150,
            d_prime_label: 75,
            n_labels: 3,
            repeats: 5,
            metric: DistanceKind::Fdd,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub baseline_rows: usize,
    pub window_size: usize,
    pub dim: usize,
    pub d_prime: usize,
    pub repeats: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub median_s: f64,
}

/// A threshold set that never flags; timing does not depend on its values.
pub fn open_thresholds(baseline: &BaselineModel, window_size: usize, metric: DistanceKind) -> ThresholdSet {
    ThresholdSet {
        t_batch: f64::INFINITY,
        t_label: baseline
            .label_set()
            .iter()
            .map(|&l| (l, f64::INFINITY))
            .collect::<BTreeMap<_, _>>(),
        n_th: 0,
        t_alpha: 0.0,
        window_size,
        metric,
        warnings: Vec::new(),
    }
}

/// Seconds per call of `detector.analyze` on `window`, after one warm-up.
pub fn time_analyze(
    detector: &Detector<'_>,
    window: &crate::batch::EmbeddingBatch,
    repeats: usize,
) -> Result<Vec<f64>> {
    detector.analyze(window, 0, None)?;
    (0..repeats)
        .map(|_| {
            let t = Instant::now();
            detector.analyze(window, 0, None)?;
            Ok(t.elapsed().as_secs_f64())
        })
        .collect()
}

pub fn summarize(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = if samples.len() > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    (mean, std, median)
}

/// Times window analysis for every (baseline rows, dim, window size)
/// combination on synthetic embeddings.
pub fn benchmark_runtime(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.repeats == 0 {
        return Err(DriftError::InvalidInput("repeats must be positive".into()));
    }
    let mut rows = Vec::new();
    for &m_b in &config.baseline_rows {
        for &d in &config.dims {
            let source = SynthSource::new(SynthConfig {
                n_labels: config.n_labels,
                dim: d,
                ..SynthConfig::default()
            })?;
            let per_label = m_b.div_ceil(config.n_labels);
            let historical = source.sample_nondrift(per_label, &mut stream_rng(config.seed, d as u64));
            let offline = OfflineConfig {
                d_prime: config.d_prime.min(d),
                d_prime_label: config.d_prime_label.min(d),
                seed: config.seed,
                ..OfflineConfig::default()
            };
            let baseline = fit_baseline(&historical, &offline)?;
            for &m_w in &config.window_sizes {
                let thresholds = open_thresholds(&baseline, m_w, config.metric);
                let detector = Detector::new(&baseline, &thresholds)?;
                let window = source.sample_nondrift(
                    m_w.div_ceil(config.n_labels),
                    &mut stream_rng(config.seed ^ 0xBE7C, m_w as u64),
                );
                let window = window.select(&(0..m_w).collect::<Vec<_>>());
                let samples = time_analyze(&detector, &window, config.repeats)?;
                let (mean_s, std_s, median_s) = summarize(&samples);
                rows.push(BenchRow {
                    baseline_rows: m_b,
                    window_size: m_w,
                    dim: d,
                    d_prime: offline.d_prime,
                    repeats: config.repeats,
                    mean_s,
                    std_s,
                    median_s,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes the timing table as CSV.
pub fn write_bench_table<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)
            .map_err(|e| DriftError::Format(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

//! Evaluation drivers: accuracy by drift severity over repeated runs, and
//! correlation between the monitored distance and an injected drift curve.

use serde::{Deserialize, Serialize};

use crate::batch::EmbeddingBatch;
use crate::error::Result;
use crate::eval::{
    build_stream, evaluate_detection, generate_pattern, spearman_corr, DetectionReport,
    DriftSchedule, Pattern, SamplePools, SeverityFlags, SynthSource,
};
use crate::offline::{estimate_thresholds, fit_baseline, BaselineModel, OfflineConfig, ThresholdSet};
use crate::online::{run_stream, MonitorLog};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::DistanceKind;

/// Data for one evaluation run: the historical set the baseline is fitted
/// on, the threshold set it is calibrated on, and the pools the test
/// stream is drawn from.
#[derive(Debug, Clone)]
pub struct RunData {
    pub historical: EmbeddingBatch,
    pub threshold: EmbeddingBatch,
    pub stream: SamplePools,
}

/// Sizes used by [`synth_run_data`], rows per label component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSplit {
    pub historical: usize,
    pub threshold: usize,
    pub stream: usize,
}

impl Default for SynthSplit {
    fn default() -> Self {
        Self {
            historical: 5000,
            threshold: 5000,
            stream: 5000,
        }
    }
}

/// Independent historical, threshold and stream draws from `source`.
pub fn synth_run_data(source: &SynthSource, split: SynthSplit, seed: u64) -> Result<RunData> {
    Ok(RunData {
        historical: source.sample_nondrift(split.historical, &mut stream_rng(seed, 0)),
        threshold: source.sample_nondrift(split.threshold, &mut stream_rng(seed, 1)),
        stream: source.pools(split.stream, derive_seed(seed, 2))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Must contain 0 and at least one positive level.
    pub severities: Vec<f64>,
    pub windows_per_level: usize,
    pub repetitions: usize,
    pub metric: DistanceKind,
    /// `window_size` here is also the test window size.
    pub offline: OfflineConfig,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            severities: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            windows_per_level: 100,
            repetitions: 5,
            metric: DistanceKind::Fdd,
            offline: OfflineConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDistances {
    pub drift_pct: f64,
    pub batch_distance: Vec<f64>,
    pub flags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub seed: u64,
    pub thresholds: ThresholdSet,
    pub levels: Vec<LevelDistances>,
    pub report: DetectionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metric: DistanceKind,
    pub runs: Vec<SweepRun>,
    /// Flags of all runs pooled per level.
    pub pooled: DetectionReport,
}

impl SweepReport {
    pub fn mean_h_dd(&self) -> f64 {
        self.runs.iter().map(|r| r.report.h_dd).sum::<f64>() / self.runs.len() as f64
    }
}

/// Fits a baseline and thresholds per repetition (thresholds are
/// re-estimated every run), then scores `windows_per_level` windows at
/// every severity. Run `r` uses seed `derive_seed(seed, r)` for its data,
/// its threshold resampling and its windows.
pub fn severity_sweep<F>(config: &SweepConfig, mut data: F) -> Result<SweepReport>
where
    F: FnMut(u64) -> Result<RunData>,
{
    let m_w = config.offline.window_size;
    let mut runs = Vec::with_capacity(config.repetitions);
    let mut all_flags = Vec::new();
    for r in 0..config.repetitions {
        let run_seed = derive_seed(config.seed, r as u64);
        let d = data(run_seed)?;
        let offline = OfflineConfig {
            seed: run_seed,
            ..config.offline.clone()
        };
        let baseline = fit_baseline(&d.historical, &offline)?;
        let thresholds = estimate_thresholds(&baseline, &d.threshold, config.metric, &offline)?;
        let mut levels = Vec::with_capacity(config.severities.len());
        let mut flags = Vec::with_capacity(config.severities.len());
        for (li, &pct) in config.severities.iter().enumerate() {
            let schedule = DriftSchedule::constant(pct, config.windows_per_level)?;
            let stream = build_stream(&d.stream, &schedule, m_w, derive_seed(run_seed, li as u64 + 1))?;
            let log = run_stream(&baseline, &thresholds, &stream.windows)?;
            let level = LevelDistances {
                drift_pct: pct,
                batch_distance: log.batch_curve(),
                flags: log.batch_flags(),
            };
            flags.push(SeverityFlags {
                drift_pct: pct,
                flags: level.flags.clone(),
            });
            levels.push(level);
        }
        let report = evaluate_detection(&flags)?;
        all_flags.extend(flags);
        runs.push(SweepRun {
            seed: run_seed,
            thresholds,
            levels,
            report,
        });
    }
    Ok(SweepReport {
        metric: config.metric,
        pooled: evaluate_detection(&all_flags)?,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRun {
    pub pattern: Pattern,
    pub drift_pct: Vec<f64>,
    pub batch_distance: Vec<f64>,
    pub flags: Vec<bool>,
    /// Spearman correlation of the per-batch distance with the injected
    /// drift percentage.
    pub spearman: f64,
}

/// Simulates `pattern`, monitors it, and correlates the distance curve with
/// the injected drift curve.
pub fn pattern_correlation(
    baseline: &BaselineModel,
    thresholds: &ThresholdSet,
    pools: &SamplePools,
    pattern: &Pattern,
    m_w: usize,
    seed: u64,
) -> Result<(PatternRun, MonitorLog)> {
    let schedule = generate_pattern(pattern)?;
    let stream = build_stream(pools, &schedule, m_w, seed)?;
    let log = run_stream(baseline, thresholds, &stream.windows)?;
    let batch_distance = log.batch_curve();
    let spearman = spearman_corr(&batch_distance, schedule.values())?;
    Ok((
        PatternRun {
            pattern: *pattern,
            drift_pct: schedule.values().to_vec(),
            flags: log.batch_flags(),
            batch_distance,
            spearman,
        },
        log,
    ))
}

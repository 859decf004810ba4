//! Detection accuracy, the harmonic drift-detection score and Spearman
//! correlation.

use serde::{Deserialize, Serialize};

use crate::error::{DriftError, Result};

/// Harmonic mean of the no-drift accuracy and the mean drifted accuracy;
/// 0 when either is 0.
pub fn h_dd(a_nodrift: f64, a_drift: f64) -> f64 {
    if a_nodrift <= 0.0 || a_drift <= 0.0 {
        0.0
    } else {
        2.0 / (1.0 / a_nodrift + 1.0 / a_drift)
    }
}

/// Window flags produced at one drift severity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityFlags {
    pub drift_pct: f64,
    pub flags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityAccuracy {
    pub drift_pct: f64,
    pub windows: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Ascending by drift percentage.
    pub levels: Vec<SeverityAccuracy>,
    pub a_nodrift: f64,
    pub a_drift: f64,
    pub h_dd: f64,
}

impl DetectionReport {
    pub fn accuracy_at(&self, drift_pct: f64) -> Option<f64> {
        self.levels
            .iter()
            .find(|l| l.drift_pct == drift_pct)
            .map(|l| l.accuracy)
    }

    /// Builds the report from per-level accuracies directly.
    pub fn from_accuracies(levels: &[(f64, f64)]) -> Result<Self> {
        let levels: Vec<SeverityAccuracy> = levels
            .iter()
            .map(|&(drift_pct, accuracy)| SeverityAccuracy {
                drift_pct,
                windows: 0,
                accuracy,
            })
            .collect();
        Self::from_levels(levels)
    }

    fn from_levels(mut levels: Vec<SeverityAccuracy>) -> Result<Self> {
        levels.sort_by(|a, b| a.drift_pct.total_cmp(&b.drift_pct));
        let a_nodrift = levels
            .iter()
            .find(|l| l.drift_pct == 0.0)
            .map(|l| l.accuracy)
            .ok_or_else(|| DriftError::InvalidInput("no 0% severity level".into()))?;
        let drifted: Vec<f64> = levels
            .iter()
            .filter(|l| l.drift_pct > 0.0)
            .map(|l| l.accuracy)
            .collect();
        if drifted.is_empty() {
            return Err(DriftError::InvalidInput("no drifted severity level".into()));
        }
        let a_drift = drifted.iter().sum::<f64>() / drifted.len() as f64;
        Ok(Self {
            levels,
            a_nodrift,
            a_drift,
            h_dd: h_dd(a_nodrift, a_drift),
        })
    }
}

/// Accuracy per severity (a flag is correct when it equals `drift_pct > 0`)
/// and the harmonic score. Flags of repeated levels are pooled.
pub fn evaluate_detection(results: &[SeverityFlags]) -> Result<DetectionReport> {
    let mut pooled: Vec<(f64, usize, usize)> = Vec::new();
    for r in results {
        if !(0.0..=100.0).contains(&r.drift_pct) {
            return Err(DriftError::InvalidInput(format!(
                "drift percentage {} outside [0, 100]",
                r.drift_pct
            )));
        }
        let truth = r.drift_pct > 0.0;
        let correct = r.flags.iter().filter(|&&f| f == truth).count();
        match pooled.iter_mut().find(|p| p.0 == r.drift_pct) {
            Some(p) => {
                p.1 += correct;
                p.2 += r.flags.len();
            }
            None => pooled.push((r.drift_pct, correct, r.flags.len())),
        }
    }
    if let Some(p) = pooled.iter().find(|p| p.2 == 0) {
        return Err(DriftError::InvalidInput(format!("no windows at {}%", p.0)));
    }
    DetectionReport::from_levels(
        pooled
            .into_iter()
            .map(|(drift_pct, correct, windows)| SeverityAccuracy {
                drift_pct,
                windows,
                accuracy: correct as f64 / windows as f64,
            })
            .collect(),
    )
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman_corr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(DriftError::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(DriftError::InvalidInput("need at least two pairs".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(DriftError::InvalidInput("non-finite value".into()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| DriftError::UndefinedCorrelation("a sequence is constant".into()))
}

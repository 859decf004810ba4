//! Drift schedules: the injected drift percentage of every window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DriftError, Result};

/// Per-window drift percentages, each in `[0, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSchedule(Vec<f64>);

impl DriftSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(DriftError::InvalidSchedule("schedule is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=100.0).contains(*v)) {
            return Err(DriftError::InvalidSchedule(format!(
                "drift percentage {v} outside [0, 100]"
            )));
        }
        Ok(Self(values))
    }

    /// `windows` windows at the same drift percentage.
    pub fn constant(level: f64, windows: usize) -> Result<Self> {
        Self::new(vec![level; windows])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ground truth per window: any drift at all.
    pub fn truth(&self) -> Vec<bool> {
        self.0.iter().map(|&d| d > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Pattern {
    /// `onset` clean windows, then `level` until the end.
    Sudden { total: usize, onset: usize, level: f64 },
    /// `onset` clean windows, then `start`, `start + step`, ... capped at 100.
    Incremental {
        total: usize,
        onset: usize,
        start: f64,
        step: f64,
    },
    /// Alternating blocks of `block` clean and `block` drifted windows,
    /// starting clean.
    Periodic { total: usize, block: usize, level: f64 },
}

impl Pattern {
    /// 100 windows, drift from window 51 at 40%.
    pub fn sudden() -> Self {
        Pattern::Sudden {
            total: 100,
            onset: 50,
            level: 40.0,
        }
    }

    /// 100 windows, drift from window 51 starting at 20% and growing 1% per window.
    pub fn incremental() -> Self {
        Pattern::Incremental {
            total: 100,
            onset: 50,
            start: 20.0,
            step: 1.0,
        }
    }

    /// 100 windows, blocks of 20 clean and 20 windows at 40%.
    pub fn periodic() -> Self {
        Pattern::Periodic {
            total: 100,
            block: 20,
            level: 40.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pattern::Sudden { .. } => "sudden",
            Pattern::Incremental { .. } => "incremental",
            Pattern::Periodic { .. } => "periodic",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `sudden`, `incremental` or `periodic` into the default parameters.
impl FromStr for Pattern {
    type Err = DriftError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sudden" | "abrupt" => Ok(Pattern::sudden()),
            "incremental" => Ok(Pattern::incremental()),
            "periodic" | "recurrent" => Ok(Pattern::periodic()),
            other => Err(DriftError::InvalidSchedule(format!("unknown pattern `{other}`"))),
        }
    }
}

fn check_level(name: &str, v: f64) -> Result<()> {
    if (0.0..=100.0).contains(&v) {
        Ok(())
    } else {
        Err(DriftError::InvalidSchedule(format!("{name} = {v} outside [0, 100]")))
    }
}

pub fn generate_pattern(pattern: &Pattern) -> Result<DriftSchedule> {
    let values = match *pattern {
        Pattern::Sudden {
            total,
            onset,
            level,
        } => {
            check_level("level", level)?;
            if onset > total {
                return Err(DriftError::InvalidSchedule(format!(
                    "onset {onset} beyond {total} windows"
                )));
            }
            (0..total)
                .map(|i| if i < onset { 0.0 } else { level })
                .collect()
        }
        Pattern::Incremental {
            total,
            onset,
            start,
            step,
        } => {
            check_level("start", start)?;
            if !(step >= 0.0) || !step.is_finite() {
                return Err(DriftError::InvalidSchedule(format!("step {step} must be ≥ 0")));
            }
            if onset > total {
                return Err(DriftError::InvalidSchedule(format!(
                    "onset {onset} beyond {total} windows"
                )));
            }
            (0..total)
                .map(|i| {
                    if i < onset {
                        0.0
                    } else {
                        (start + step * (i - onset) as f64).min(100.0)
                    }
                })
                .collect()
        }
        Pattern::Periodic {
            total,
            block,
            level,
        } => {
            check_level("level", level)?;
            if block == 0 {
                return Err(DriftError::InvalidSchedule("block length must be positive".into()));
            }
            (0..total)
                .map(|i| if (i / block) % 2 == 0 { 0.0 } else { level })
                .collect()
        }
    };
    DriftSchedule::new(values)
}

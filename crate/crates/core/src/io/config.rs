//! JSON config file. Every key is optional; command-line flags override
//! file values, which override the built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batch::LabelId;
use crate::error::Result;
use crate::offline::OfflineConfig;
use crate::stats::DistanceKind;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub d_prime: Option<usize>,
    pub d_prime_label: Option<usize>,
    pub n_th: Option<usize>,
    pub t_alpha: Option<f64>,
    pub window_size: Option<usize>,
    pub metric: Option<DistanceKind>,
    pub seed: Option<u64>,
    pub labels: Option<Vec<LabelId>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        super::read_json(path)
    }

    /// Copies the keys present in the file onto `config`.
    pub fn apply(&self, config: &mut OfflineConfig) {
        if let Some(v) = self.d_prime {
            config.d_prime = v;
        }
        if let Some(v) = self.d_prime_label {
            config.d_prime_label = v;
        }
        if let Some(v) = self.n_th {
            config.n_th = v;
        }
        if let Some(v) = self.t_alpha {
            config.t_alpha = v;
        }
        if let Some(v) = self.window_size {
            config.window_size = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = &self.labels {
            config.labels = Some(v.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_overrides_only_present_keys() {
        let cfg: ConfigFile = serde_json::from_str(r#"{"n_th": 50, "metric": "kl"}"#).unwrap();
        let mut c = OfflineConfig::default();
        cfg.apply(&mut c);
        assert_eq!(c.n_th, 50);
        assert_eq!(c.d_prime, 150);
        assert_eq!(cfg.metric, Some(DistanceKind::Kl));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"dprime": 3}"#).is_err());
    }
}

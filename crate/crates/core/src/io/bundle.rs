//! Model bundle: the frozen baseline, its thresholds and creation metadata.
//!
//! Layout: `"DLMB"`, `u32` little-endian format version, then a CBOR body.
//! CBOR keeps every `f64` (including `+∞` thresholds) bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{DriftError, Result};
use crate::io::atomic_write;
use crate::offline::{BaselineModel, ThresholdSet};
use crate::stats::DistanceKind;

pub const BUNDLE_MAGIC: &[u8; 4] = b"DLMB";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMetadata {
    pub seed: u64,
    /// Hex SHA-256 of the canonical JSON of the offline config and metric.
    pub config_hash: String,
    pub created_at: String,
    pub crate_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub baseline: BaselineModel,
    /// Absent for a baseline saved before threshold estimation.
    pub thresholds: Option<ThresholdSet>,
    pub metadata: BundleMetadata,
}

/// A loaded bundle plus integrity warnings (e.g. a config hash mismatch).
#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub bundle: ModelBundle,
    pub warnings: Vec<String>,
}

/// Hash of the parameters that produced `baseline` and `thresholds`.
pub fn config_hash(baseline: &BaselineModel, metric: Option<DistanceKind>) -> String {
    #[derive(Serialize)]
    struct Canonical<'a> {
        config: &'a crate::offline::OfflineConfig,
        metric: Option<DistanceKind>,
    }
    let json = serde_json::to_vec(&Canonical {
        config: baseline.config(),
        metric,
    })
    .expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

impl ModelBundle {
    /// `created_at` defaults to the current UTC time; pin it for
    /// byte-identical output.
    pub fn new(
        baseline: BaselineModel,
        thresholds: Option<ThresholdSet>,
        created_at: Option<String>,
    ) -> Self {
        let metadata = BundleMetadata {
            seed: baseline.config().seed,
            config_hash: config_hash(&baseline, thresholds.as_ref().map(|t| t.metric)),
            created_at: created_at.unwrap_or_else(|| {
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
            }),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        Self {
            baseline,
            thresholds,
            metadata,
        }
    }

    pub fn thresholds(&self) -> Result<&ThresholdSet> {
        self.thresholds.as_ref().ok_or_else(|| {
            DriftError::InvalidInput(
                "bundle holds no thresholds; run estimate-threshold first".into(),
            )
        })
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(BUNDLE_MAGIC);
        out.extend_from_slice(&BUNDLE_VERSION.to_le_bytes());
        ciborium::into_writer(self, &mut out)
            .map_err(|e| DriftError::Format(format!("encoding bundle: {e}")))?;
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<LoadedBundle> {
        if bytes.len() < 4 || &bytes[..4] != BUNDLE_MAGIC {
            return Err(DriftError::Format("not a model bundle (bad magic)".into()));
        }
        if bytes.len() < 8 {
            return Err(DriftError::CorruptFile("truncated bundle header".into()));
        }
        let found = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if found != BUNDLE_VERSION {
            return Err(DriftError::Version {
                found,
                expected: BUNDLE_VERSION,
            });
        }
        let mut body = &bytes[8..];
        let bundle: ModelBundle = ciborium::from_reader(&mut body)
            .map_err(|e| DriftError::CorruptFile(format!("bundle body: {e}")))?;
        if !body.is_empty() {
            return Err(DriftError::CorruptFile(format!(
                "{} trailing bytes after bundle body",
                body.len()
            )));
        }
        let mut warnings = Vec::new();
        let expected = config_hash(&bundle.baseline, bundle.thresholds.as_ref().map(|t| t.metric));
        if expected != bundle.metadata.config_hash {
            warnings.push(format!(
                "config hash mismatch: bundle records {}, contents hash to {expected}",
                bundle.metadata.config_hash
            ));
        }
        Ok(LoadedBundle { bundle, warnings })
    }
}

pub fn save_bundle(path: &Path, bundle: &ModelBundle) -> Result<()> {
    atomic_write(path, &bundle.encode()?)
}

pub fn load_bundle(path: &Path) -> Result<LoadedBundle> {
    ModelBundle::decode(&std::fs::read(path)?)
}

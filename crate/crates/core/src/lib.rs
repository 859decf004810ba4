//! Concept-drift detection for classifiers that expose embeddings.
//!
//! Embedding distributions are summarized as multivariate Gaussians after a
//! PCA reduction, both for a whole window ("per-batch") and per predicted
//! label. A frozen baseline is fitted offline together with distance
//! thresholds; online windows are scored against it with the Fréchet
//! distance (or an alternative Gaussian distance), producing a drift monitor.
//! Drifted windows can be explained with k-means prototypes.
//!
//! Module map:
//!
//! - [`stats`]: Gaussian estimation, PCA, matrix square root, distances
//! - [`offline`]: baseline fitting and threshold estimation
//! - [`online`]: window analysis, monitor log, curve and chart export
//! - [`explain`]: clustering, prototypes, purity
//! - [`eval`]: drift patterns, stream simulation, evaluation metrics, benchmarks
//! - [`io`]: embedding files, model bundles, stream directories
//! - [`cli`]: the `embdrift` command line

pub mod batch;
pub mod cli;
pub mod error;
pub mod eval;
pub mod explain;
pub mod io;
pub mod offline;
pub mod online;
pub(crate) mod rng;
pub mod stats;

pub use batch::{EmbeddingBatch, LabelId};
pub use error::{DriftError, RankScope, Result};
pub use offline::{estimate_thresholds, fit_baseline, BaselineModel, OfflineConfig, ThresholdSet};
pub use online::{analyze_window, run_stream, Detector, MonitorLog, WindowReport};
pub use stats::{DistanceKind, GaussianSummary, PcaProjector};

//! Numerical primitives: Gaussian fitting, PCA, the PSD square root and the
//! distribution distances.

pub mod distance;
pub mod gaussian;
pub mod linalg;
pub mod pca;

pub use distance::{
    alt_distance, bhattacharyya, fdd, js_divergence, kl_divergence, mahalanobis,
    moment_matched_midpoint, DistanceKind, PreparedReference,
};
pub use gaussian::{estimate_gaussian, estimate_gaussian_rows, GaussianSummary};
pub use linalg::psd_sqrt;
pub use pca::{fit_pca, fit_pca_embeddings, PcaProjector};

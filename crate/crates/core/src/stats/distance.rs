//! Distances and divergences between two Gaussians.
//!
//! The Fréchet distance is the default drift score. KL, Jensen-Shannon,
//! Mahalanobis and Bhattacharyya are alternatives. For the asymmetric
//! measures, the second argument `b` is the reference distribution (the
//! baseline when scoring a window).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gaussian::GaussianSummary;
use super::linalg::{psd_sqrt, symmetrize, trace_sqrt, JitteredFactor};
use crate::error::{DriftError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    /// Fréchet (Wasserstein-2) distance between Gaussians.
    #[default]
    Fdd,
    /// Kullback-Leibler divergence `KL(a ‖ b)`.
    Kl,
    /// Jensen-Shannon divergence against the moment-matched mixture.
    Js,
    /// Mahalanobis distance of `a`'s mean under `b`'s covariance.
    Mahalanobis,
    Bhattacharyya,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 5] = [
        DistanceKind::Fdd,
        DistanceKind::Kl,
        DistanceKind::Js,
        DistanceKind::Mahalanobis,
        DistanceKind::Bhattacharyya,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Fdd => "fdd",
            DistanceKind::Kl => "kl",
            DistanceKind::Js => "js",
            DistanceKind::Mahalanobis => "mahalanobis",
            DistanceKind::Bhattacharyya => "bhattacharyya",
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, DistanceKind::Kl | DistanceKind::Mahalanobis)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = DriftError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fdd" | "frechet" => Ok(DistanceKind::Fdd),
            "kl" => Ok(DistanceKind::Kl),
            "js" => Ok(DistanceKind::Js),
            "mahalanobis" => Ok(DistanceKind::Mahalanobis),
            "bhattacharyya" => Ok(DistanceKind::Bhattacharyya),
            other => Err(DriftError::InvalidInput(format!(
                "unknown distance metric `{other}` (expected fdd, kl, js, mahalanobis or bhattacharyya)"
            ))),
        }
    }
}

fn check_dims(a: &GaussianSummary, b: &GaussianSummary) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(DriftError::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Combines the Fréchet terms, clamping round-off below zero.
fn frechet_from_parts(mean_sq: f64, trace_a: f64, trace_b: f64, trace_cross: f64) -> f64 {
    (mean_sq + trace_a + trace_b - 2.0 * trace_cross).max(0.0)
}

/// Fréchet distance
/// `‖μa − μb‖² + Tr(Σa + Σb − 2 (Σa^½ Σb Σa^½)^½)`.
///
/// The cross term uses the symmetric sandwich, which has the same trace as
/// `(Σa Σb)^½` but stays real and symmetric.
pub fn fdd(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    check_dims(a, b)?;
    let sqrt_a = psd_sqrt(a.covariance())?;
    fdd_with_sqrt(a, &sqrt_a, b)
}

fn fdd_with_sqrt(a: &GaussianSummary, sqrt_a: &DMatrix<f64>, b: &GaussianSummary) -> Result<f64> {
    let sandwich = symmetrize(&(sqrt_a * b.covariance() * sqrt_a));
    let cross = trace_sqrt(sandwich)?;
    let mean_sq = (a.mean() - b.mean()).norm_squared();
    Ok(frechet_from_parts(
        mean_sq,
        a.covariance().trace(),
        b.covariance().trace(),
        cross,
    ))
}

fn kl_with_factors(
    a: &GaussianSummary,
    fa: &JitteredFactor,
    b: &GaussianSummary,
    fb: &JitteredFactor,
) -> f64 {
    let k = a.dim() as f64;
    let a_jit = super::linalg::jittered(a.covariance());
    let trace_term = fb.solve(&a_jit).trace();
    let diff: DVector<f64> = b.mean() - a.mean();
    let quad = fb.quad_form(&diff);
    (0.5 * (trace_term + quad - k + fb.log_det - fa.log_det)).max(0.0)
}

/// `KL(a ‖ b)` between Gaussians (both covariances jittered).
pub fn kl_divergence(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    check_dims(a, b)?;
    let fa = JitteredFactor::new(a.covariance())?;
    let fb = JitteredFactor::new(b.covariance())?;
    Ok(kl_with_factors(a, &fa, b, &fb))
}

/// Gaussian matching the first two moments of the equal-weight mixture of
/// `a` and `b`.
pub fn moment_matched_midpoint(a: &GaussianSummary, b: &GaussianSummary) -> Result<GaussianSummary> {
    check_dims(a, b)?;
    let mean = (a.mean() + b.mean()) * 0.5;
    let delta: DVector<f64> = a.mean() - b.mean();
    // ½ Σ_i (μ_i − μ_m)(μ_i − μ_m)ᵀ with μ_a − μ_m = −(μ_b − μ_m) = Δ/2
    let spread = &delta * delta.transpose() * 0.25;
    let covariance = (a.covariance() + b.covariance()) * 0.5 + spread;
    GaussianSummary::new(
        mean,
        covariance,
        a.sample_count() + b.sample_count(),
    )
}

/// Jensen-Shannon divergence `½ KL(a ‖ m) + ½ KL(b ‖ m)` with `m` the
/// moment-matched mixture midpoint.
pub fn js_divergence(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    let m = moment_matched_midpoint(a, b)?;
    let fm = JitteredFactor::new(m.covariance())?;
    let fa = JitteredFactor::new(a.covariance())?;
    let fb = JitteredFactor::new(b.covariance())?;
    Ok(0.5 * kl_with_factors(a, &fa, &m, &fm) + 0.5 * kl_with_factors(b, &fb, &m, &fm))
}

/// `√((μa − μb)ᵀ Σb⁻¹ (μa − μb))`.
pub fn mahalanobis(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    check_dims(a, b)?;
    let fb = JitteredFactor::new(b.covariance())?;
    Ok(mahalanobis_with_factor(a, b, &fb))
}

fn mahalanobis_with_factor(a: &GaussianSummary, b: &GaussianSummary, fb: &JitteredFactor) -> f64 {
    let diff: DVector<f64> = a.mean() - b.mean();
    fb.quad_form(&diff).max(0.0).sqrt()
}

/// `⅛ ΔμᵀΣ̄⁻¹Δμ + ½ ln(det Σ̄ / √(det Σa · det Σb))`, `Σ̄ = (Σa + Σb)/2`.
pub fn bhattacharyya(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    check_dims(a, b)?;
    let avg = (a.covariance() + b.covariance()) * 0.5;
    let f_avg = JitteredFactor::new(&avg)?;
    let fa = JitteredFactor::new(a.covariance())?;
    let fb = JitteredFactor::new(b.covariance())?;
    let diff: DVector<f64> = a.mean() - b.mean();
    let quad = f_avg.quad_form(&diff);
    let log_term = f_avg.log_det - 0.5 * (fa.log_det + fb.log_det);
    Ok((quad / 8.0 + 0.5 * log_term).max(0.0))
}

/// Distance of the requested kind with `b` as the reference distribution.
pub fn alt_distance(kind: DistanceKind, a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    match kind {
        DistanceKind::Fdd => fdd(a, b),
        DistanceKind::Kl => kl_divergence(a, b),
        DistanceKind::Js => js_divergence(a, b),
        DistanceKind::Mahalanobis => mahalanobis(a, b),
        DistanceKind::Bhattacharyya => bhattacharyya(a, b),
    }
}

enum ReferenceCache {
    Fdd { sqrt_cov: DMatrix<f64> },
    Factor(JitteredFactor),
    Plain,
}

/// A reference Gaussian with the parts of the distance computation that
/// depend only on it (square root, Cholesky factor) precomputed.
pub struct PreparedReference {
    kind: DistanceKind,
    summary: GaussianSummary,
    cache: ReferenceCache,
}

impl PreparedReference {
    pub fn new(kind: DistanceKind, summary: GaussianSummary) -> Result<Self> {
        let cache = match kind {
            DistanceKind::Fdd => ReferenceCache::Fdd {
                sqrt_cov: psd_sqrt(summary.covariance())?,
            },
            DistanceKind::Kl | DistanceKind::Mahalanobis => {
                ReferenceCache::Factor(JitteredFactor::new(summary.covariance())?)
            }
            DistanceKind::Js | DistanceKind::Bhattacharyya => ReferenceCache::Plain,
        };
        Ok(Self {
            kind,
            summary,
            cache,
        })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn summary(&self) -> &GaussianSummary {
        &self.summary
    }

    /// Distance from `window` to this reference; equals
    /// `alt_distance(kind, window, reference)` up to round-off.
    pub fn distance_to(&self, window: &GaussianSummary) -> Result<f64> {
        check_dims(window, &self.summary)?;
        match &self.cache {
            ReferenceCache::Fdd { sqrt_cov } => fdd_with_sqrt(&self.summary, sqrt_cov, window),
            ReferenceCache::Factor(fb) => match self.kind {
                DistanceKind::Kl => {
                    let fa = JitteredFactor::new(window.covariance())?;
                    Ok(kl_with_factors(window, &fa, &self.summary, fb))
                }
                _ => Ok(mahalanobis_with_factor(window, &self.summary, fb)),
            },
            ReferenceCache::Plain => alt_distance(self.kind, window, &self.summary),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(mean: f64, var: f64) -> GaussianSummary {
        GaussianSummary::new(
            DVector::from_vec(vec![mean]),
            DMatrix::from_element(1, 1, var),
            10,
        )
        .unwrap()
    }

    fn g(mean: &[f64], cov: &[f64]) -> GaussianSummary {
        let k = mean.len();
        GaussianSummary::new(
            DVector::from_column_slice(mean),
            DMatrix::from_row_slice(k, k, cov),
            10,
        )
        .unwrap()
    }

    #[test]
    fn fdd_one_dimensional() {
        let d = fdd(&g1(0.0, 1.0), &g1(3.0, 4.0)).unwrap();
        assert!((d - 10.0).abs() < 1e-12);
    }

    #[test]
    fn fdd_identity_and_mean_shift() {
        let a = g(&[0.0, 1.0], &[2.0, 0.5, 0.5, 1.0]);
        assert!(fdd(&a, &a).unwrap() <= 1e-8);
        let b = g(&[3.0, -3.0], &[2.0, 0.5, 0.5, 1.0]);
        assert!((fdd(&a, &b).unwrap() - 25.0).abs() < 1e-9);
    }

    #[test]
    fn fdd_dimension_mismatch() {
        let a = g1(0.0, 1.0);
        let b = g(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(fdd(&a, &b), Err(DriftError::Dimension { .. })));
        for kind in DistanceKind::ALL {
            assert!(alt_distance(kind, &a, &b).is_err());
        }
    }

    #[test]
    fn every_kind_zero_on_identical() {
        let a = g(&[1.0, -2.0, 0.5], &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5]);
        for kind in DistanceKind::ALL {
            let d = alt_distance(kind, &a, &a).unwrap();
            assert!(d.abs() <= 1e-8, "{kind}: {d}");
        }
    }

    #[test]
    fn closed_forms() {
        let kl = kl_divergence(&g1(0.0, 1.0), &g1(1.0, 1.0)).unwrap();
        assert!((kl - 0.5).abs() < 1e-5, "{kl}");
        let m = mahalanobis(
            &g(&[3.0, 4.0], &[1.0, 0.0, 0.0, 1.0]),
            &g(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]),
        )
        .unwrap();
        assert!((m - 5.0).abs() < 1e-5, "{m}");
    }

    #[test]
    fn prepared_matches_direct() {
        let base = g(&[0.0, 0.0], &[2.0, 0.4, 0.4, 1.0]);
        let win = g(&[0.5, -1.0], &[1.5, -0.2, -0.2, 3.0]);
        for kind in DistanceKind::ALL {
            let p = PreparedReference::new(kind, base.clone()).unwrap();
            let direct = alt_distance(kind, &win, &base).unwrap();
            let fast = p.distance_to(&win).unwrap();
            assert!((direct - fast).abs() <= 1e-10 * direct.max(1.0), "{kind}");
        }
    }

    #[test]
    fn singular_reference() {
        let zero = g(&[0.0, 0.0], &[0.0, 0.0, 0.0, 0.0]);
        let a = g(&[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            mahalanobis(&a, &zero),
            Err(DriftError::SingularCovariance)
        ));
        assert!(matches!(
            kl_divergence(&a, &zero),
            Err(DriftError::SingularCovariance)
        ));
        // the Fréchet distance handles singular covariances
        assert!((fdd(&a, &zero).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn parse_kinds() {
        for kind in DistanceKind::ALL {
            assert_eq!(kind.name().parse::<DistanceKind>().unwrap(), kind);
        }
        assert!("euclid".parse::<DistanceKind>().is_err());
        assert_eq!(DistanceKind::default(), DistanceKind::Fdd);
    }
}

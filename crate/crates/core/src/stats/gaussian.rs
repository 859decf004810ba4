use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::{asymmetry, symmetrize, SYMMETRY_TOL};
use crate::error::{DriftError, Result};

/// Mean and covariance of a multivariate normal fitted to a set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    sample_count: usize,
}

impl GaussianSummary {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>, sample_count: usize) -> Result<Self> {
        let k = mean.len();
        if covariance.nrows() != k || covariance.ncols() != k {
            return Err(DriftError::Dimension {
                expected: k,
                got: covariance.nrows().max(covariance.ncols()),
            });
        }
        if sample_count == 0 {
            return Err(DriftError::InvalidInput("sample_count must be positive".into()));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(DriftError::InvalidInput("non-finite Gaussian parameter".into()));
        }
        let a = asymmetry(&covariance);
        if a > SYMMETRY_TOL {
            return Err(DriftError::InvalidInput(format!(
                "covariance is not symmetric (relative asymmetry {a:e})"
            )));
        }
        Ok(Self {
            mean,
            covariance: symmetrize(&covariance),
            sample_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }
}

/// Fits a Gaussian to the rows of `rows` (`n × k`): column means and the
/// unbiased (`n − 1`) sample covariance, symmetrized.
pub fn estimate_gaussian(rows: &DMatrix<f64>) -> Result<GaussianSummary> {
    gaussian_from(rows)
}

/// [`estimate_gaussian`] over single-precision rows; all arithmetic is
/// done in `f64`.
pub(crate) fn estimate_gaussian_f32(rows: &DMatrix<f32>) -> Result<GaussianSummary> {
    gaussian_from(rows)
}

fn gaussian_from<T: Copy + Into<f64> + nalgebra::Scalar>(rows: &DMatrix<T>) -> Result<GaussianSummary> {
    let n = rows.nrows();
    if n < 2 {
        return Err(DriftError::InsufficientSamples { required: 2, got: n });
    }
    let k = rows.ncols();
    let mut centered = DMatrix::<f64>::zeros(n, k);
    let mut mean = DVector::<f64>::zeros(k);
    for j in 0..k {
        let src = rows.column(j);
        let mut sum = 0.0;
        for &v in src.iter() {
            let v: f64 = v.into();
            if !v.is_finite() {
                return Err(DriftError::InvalidInput("non-finite entry in rows".into()));
            }
            sum += v;
        }
        let mu = sum / n as f64;
        mean[j] = mu;
        for (o, &v) in centered.column_mut(j).iter_mut().zip(src.iter()) {
            *o = v.into() - mu;
        }
    }
    let mut covariance = DMatrix::<f64>::zeros(k, k);
    // SAFETY: Xcᵀ is read through swapped strides of the n×k column-major
    // `centered`; the k×k output is a separate allocation.
    unsafe {
        matrixmultiply::dgemm(
            k,
            n,
            k,
            1.0 / (n - 1) as f64,
            centered.as_ptr(),
            n as isize,
            1,
            centered.as_ptr(),
            1,
            n as isize,
            0.0,
            covariance.as_mut_ptr(),
            1,
            k as isize,
        );
    }
    Ok(GaussianSummary {
        mean,
        covariance: symmetrize(&covariance),
        sample_count: n,
    })
}

/// [`estimate_gaussian`] over a subset of rows of `source` (repeats allowed).
pub fn estimate_gaussian_rows(source: &DMatrix<f64>, indices: &[usize]) -> Result<GaussianSummary> {
    estimate_gaussian(&source.select_rows(indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn two_point_covariance() {
        let rows = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 2.0, 2.0]);
        let g = estimate_gaussian(&rows).unwrap();
        assert_eq!(g.mean().as_slice(), &[1.0, 1.0]);
        assert_eq!(g.covariance().as_slice(), &[2.0, 2.0, 2.0, 2.0]);
        assert_eq!(g.sample_count(), 2);
    }

    #[test]
    fn identical_rows_have_zero_covariance() {
        let rows = DMatrix::from_fn(5, 3, |_, j| j as f64 * 1.5 - 2.0);
        let g = estimate_gaussian(&rows).unwrap();
        assert_eq!(g.mean().as_slice(), &[-2.0, -0.5, 1.0]);
        assert!(g.covariance().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn monte_carlo_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let rows = DMatrix::from_fn(100_000, 1, |_, _| StandardNormal.sample(&mut rng));
        let g = estimate_gaussian(&rows).unwrap();
        assert!(g.mean()[0].abs() <= 0.02, "mean {}", g.mean()[0]);
        assert!((g.covariance()[(0, 0)] - 1.0).abs() <= 0.03);
    }

    #[test]
    fn errors() {
        let one = DMatrix::<f64>::zeros(1, 3);
        assert!(matches!(
            estimate_gaussian(&one),
            Err(DriftError::InsufficientSamples { required: 2, got: 1 })
        ));
        let mut bad = DMatrix::<f64>::zeros(3, 2);
        bad[(2, 1)] = f64::INFINITY;
        assert!(matches!(estimate_gaussian(&bad), Err(DriftError::InvalidInput(_))));
    }

    #[test]
    fn summary_validation() {
        let m = DVector::from_vec(vec![0.0, 0.0]);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 1.0]);
        assert!(GaussianSummary::new(m.clone(), asym, 3).is_err());
        let wrong = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            GaussianSummary::new(m, wrong, 3),
            Err(DriftError::Dimension { .. })
        ));
    }
}

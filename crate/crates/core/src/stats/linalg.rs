//! Symmetric-matrix helpers shared by the Gaussian distances.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{DriftError, Result};

/// Relative tolerance for the symmetry check of covariance-like inputs.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues in `[-PSD_TOL, 0)` (scaled by the spectrum magnitude when it
/// exceeds one) are clipped to zero; anything more negative is rejected.
pub const PSD_TOL: f64 = 1e-8;

/// Relative diagonal jitter added before inverting a covariance.
pub const JITTER_REL: f64 = 1e-6;

/// `(S + Sᵀ) / 2`.
pub fn symmetrize(s: &DMatrix<f64>) -> DMatrix<f64> {
    (s + s.transpose()) * 0.5
}

/// Largest absolute entry of `S − Sᵀ` relative to the largest absolute entry
/// of `S` (zero for the zero matrix).
pub fn asymmetry(s: &DMatrix<f64>) -> f64 {
    let scale = s.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let n = s.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    worst / scale
}

pub(crate) fn check_square(s: &DMatrix<f64>) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(DriftError::Dimension {
            expected: s.nrows(),
            got: s.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn check_symmetric(s: &DMatrix<f64>) -> Result<()> {
    check_square(s)?;
    let a = asymmetry(s);
    if a > SYMMETRY_TOL {
        return Err(DriftError::InvalidInput(format!(
            "matrix is not symmetric (relative asymmetry {a:e})"
        )));
    }
    Ok(())
}

fn psd_floor(eigenvalues: &DVector<f64>) -> f64 {
    let scale = eigenvalues.amax().max(1.0);
    -PSD_TOL * scale
}

/// Clips eigenvalues in the tolerance band to zero, rejecting clearly
/// negative ones.
pub(crate) fn clip_psd_eigenvalues(eigenvalues: &mut DVector<f64>) -> Result<()> {
    let floor = psd_floor(eigenvalues);
    for v in eigenvalues.iter_mut() {
        if *v < floor {
            return Err(DriftError::NotPsd { min_eigenvalue: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric matrix with eigenpairs ordered by
/// decreasing eigenvalue.
pub fn sorted_symmetric_eigen(s: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Symmetric PSD square root `R` with `R·R ≈ S`.
///
/// `S` must be symmetric within [`SYMMETRY_TOL`]; slightly negative
/// eigenvalues (numerical noise) are clipped to zero.
pub fn psd_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(s)?;
    let eig = SymmetricEigen::new(symmetrize(s));
    let mut values = eig.eigenvalues;
    clip_psd_eigenvalues(&mut values)?;
    let v = eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * values[c].sqrt());
    Ok(symmetrize(&(&scaled * v.transpose())))
}

/// Sum of the square roots of the (clipped) eigenvalues of a symmetric PSD
/// matrix, i.e. `Tr(√S)`.
pub(crate) fn trace_sqrt(s: DMatrix<f64>) -> Result<f64> {
    let mut values = s.symmetric_eigenvalues();
    clip_psd_eigenvalues(&mut values)?;
    Ok(values.iter().map(|v| v.sqrt()).sum())
}

/// `S + JITTER_REL · mean(diag S) · I`.
pub fn jittered(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let eps = if n == 0 {
        0.0
    } else {
        JITTER_REL * s.diagonal().sum() / n as f64
    };
    let mut out = symmetrize(s);
    for i in 0..n {
        out[(i, i)] += eps;
    }
    out
}

/// Cholesky factor of a symmetric matrix after jitter, with its log-determinant.
pub(crate) struct JitteredFactor {
    pub chol: Cholesky<f64, Dyn>,
    pub log_det: f64,
}

impl JitteredFactor {
    pub fn new(s: &DMatrix<f64>) -> Result<Self> {
        let j = jittered(s);
        let chol = Cholesky::new(j).ok_or(DriftError::SingularCovariance)?;
        let l = chol.l_dirty();
        let mut log_det = 0.0;
        for i in 0..l.nrows() {
            let d = l[(i, i)];
            if !(d > 0.0) || !d.is_finite() {
                return Err(DriftError::SingularCovariance);
            }
            log_det += 2.0 * d.ln();
        }
        Ok(Self { chol, log_det })
    }

    /// `S⁻¹ v`.
    pub fn solve_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    /// `S⁻¹ M`.
    pub fn solve(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(m)
    }

    /// `vᵀ S⁻¹ v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&self.solve_vec(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(rank, n, |_, _| rng.random_range(-1.0..1.0));
        a.transpose() * a
    }

    #[test]
    fn sqrt_identity_and_diagonal() {
        let i = DMatrix::<f64>::identity(4, 4);
        assert!((psd_sqrt(&i).unwrap() - &i).norm() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = psd_sqrt(&d).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        assert!((r - expected).norm() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let n = 1 + trial % 12;
            let rank = 1 + (trial * 7) % n.max(1);
            let s = random_psd(&mut rng, n, rank.min(n));
            let r = psd_sqrt(&s).unwrap();
            assert!(asymmetry(&r) < 1e-12);
            let err = (&r * &r - &s).norm();
            assert!(err <= 1e-7 * s.norm().max(1e-300), "trial {trial}: {err}");
            let (vals, _) = sorted_symmetric_eigen(r);
            assert!(vals.iter().all(|v| *v >= -1e-12));
        }
    }

    #[test]
    fn sqrt_rejects_negative_definite() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        assert!(matches!(psd_sqrt(&s), Err(DriftError::NotPsd { .. })));
    }

    #[test]
    fn sqrt_clips_tiny_negative_eigenvalue() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-10]));
        let r = psd_sqrt(&s).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
    }

    #[test]
    fn sqrt_rejects_asymmetric() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(psd_sqrt(&s), Err(DriftError::InvalidInput(_))));
    }

    #[test]
    fn sorted_eigen_is_descending() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 5.0, 3.0]));
        let (vals, vecs) = sorted_symmetric_eigen(s);
        assert_eq!(vals.as_slice(), &[5.0, 3.0, 1.0]);
        assert_eq!(vecs[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn jittered_factor_of_zero_matrix_is_singular() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert!(matches!(
            JitteredFactor::new(&z),
            Err(DriftError::SingularCovariance)
        ));
    }

    #[test]
    fn log_det_of_diagonal() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        let f = JitteredFactor::new(&d).unwrap();
        let eps = JITTER_REL * 2.5;
        let expected = ((2.0 + eps) * (3.0 + eps) as f64).ln();
        assert!((f.log_det - expected).abs() < 1e-12);
    }
}

//! Principal component analysis used to reduce embeddings before the
//! Gaussian fit.
//!
//! Components are the top right-singular directions of the centered data,
//! obtained from the eigen-decomposition of whichever Gram matrix is smaller
//! (`XcᵀXc` when `n ≥ d`, `XcXcᵀ` otherwise). The projection is plain, not
//! whitened. Each component is oriented so that its largest-magnitude
//! loading is positive, which makes fitted models reproducible.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::{sorted_symmetric_eigen, symmetrize};
use crate::error::{DriftError, RankScope, Result};

const CHUNK_ROWS: usize = 4096;
const PROJECT_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjector {
    center: DVector<f64>,
    /// `k × d`, orthonormal rows.
    components: DMatrix<f64>,
    /// Sample variance captured by each component, descending.
    explained_variance: DVector<f64>,
}

impl PcaProjector {
    /// Target dimensionality.
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    /// Width of the rows this projector accepts.
    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn explained_variance(&self) -> &DVector<f64> {
        &self.explained_variance
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.input_dim() {
            return Err(DriftError::Dimension {
                expected: self.input_dim(),
                got,
            });
        }
        Ok(())
    }

    /// `(rows − center) · componentsᵀ` in double precision.
    pub fn project(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_width(rows.ncols())?;
        let mut centered = rows.clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-self.center[j]);
        }
        Ok(centered * self.components.transpose())
    }

    /// Projects single-precision embedding rows, optionally only the rows
    /// listed in `subset` (in that order).
    ///
    /// Centering and the product run in `f32`, which matches the precision
    /// of stored embeddings and halves the cost of the dominant `n·d·k`
    /// product; the reduced coordinates are returned widened to `f64`.
    pub fn project_embeddings(
        &self,
        rows: &DMatrix<f32>,
        subset: Option<&[usize]>,
    ) -> Result<DMatrix<f64>> {
        Ok(self.project_embeddings_f32(rows, subset)?.map(f64::from))
    }

    /// Like [`Self::project_embeddings`] but keeps the reduced rows in `f32`.
    ///
    /// Rows are centered a chunk at a time into one reused buffer, so a
    /// large window is never copied whole.
    pub(crate) fn project_embeddings_f32(
        &self,
        rows: &DMatrix<f32>,
        subset: Option<&[usize]>,
    ) -> Result<DMatrix<f32>> {
        self.check_width(rows.ncols())?;
        let (m, d) = rows.shape();
        if let Some(&bad) = subset.and_then(|idx| idx.iter().find(|&&i| i >= m)) {
            return Err(DriftError::InvalidInput(format!("row index {bad} out of range for {m} rows")));
        }
        let n = subset.map_or(m, <[usize]>::len);
        let k = self.k();
        let components_t = self.components.transpose().map(|v| v as f32);
        let center: Vec<f32> = self.center.iter().map(|&c| c as f32).collect();
        let mut out = DMatrix::<f32>::zeros(n, k);
        let chunk = PROJECT_CHUNK.min(n.max(1));
        let mut buf = vec![0f32; chunk * d];
        let src = rows.as_slice();
        let mut start = 0;
        while start < n {
            let len = chunk.min(n - start);
            for (j, &c) in center.iter().enumerate() {
                let col = &src[j * m..(j + 1) * m];
                let dst = &mut buf[j * len..(j + 1) * len];
                match subset {
                    Some(idx) => {
                        for (o, &i) in dst.iter_mut().zip(&idx[start..start + len]) {
                            *o = col[i] - c;
                        }
                    }
                    None => {
                        for (o, &v) in dst.iter_mut().zip(&col[start..start + len]) {
                            *o = v - c;
                        }
                    }
                }
            }
            // SAFETY: buf is len×d column-major, components_t is d×k
            // column-major, and out rows start..start+len exist with column
            // stride n; the three regions do not alias.
            unsafe {
                matrixmultiply::sgemm(
                    len,
                    d,
                    k,
                    1.0,
                    buf.as_ptr(),
                    1,
                    len as isize,
                    components_t.as_ptr(),
                    1,
                    d as isize,
                    0.0,
                    out.as_mut_ptr().add(start),
                    1,
                    n as isize,
                );
            }
            start += len;
        }
        Ok(out)
    }

    /// Maps reduced coordinates back to the input space.
    pub fn reconstruct(&self, reduced: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if reduced.ncols() != self.k() {
            return Err(DriftError::Dimension {
                expected: self.k(),
                got: reduced.ncols(),
            });
        }
        let mut out = reduced * &self.components;
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.center[j]);
        }
        Ok(out)
    }
}

/// Fits a `k`-component PCA on the rows of `rows` (`n × d`).
///
/// Fails with a rank error when `k` exceeds `min(n, d)` or the numerical
/// rank of the centered data (all-equal rows have rank zero).
pub fn fit_pca(rows: &DMatrix<f64>, k: usize) -> Result<PcaProjector> {
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(DriftError::InvalidInput("non-finite entry in rows".into()));
    }
    fit_impl(rows.nrows(), rows.ncols(), k, |start, len| {
        rows.rows(start, len).into_owned()
    })
}

/// [`fit_pca`] over single-precision embeddings, optionally restricted to
/// the rows in `subset`. Accumulation happens in `f64`.
pub fn fit_pca_embeddings(
    rows: &DMatrix<f32>,
    subset: Option<&[usize]>,
    k: usize,
) -> Result<PcaProjector> {
    let n = subset.map_or(rows.nrows(), <[usize]>::len);
    fit_impl(n, rows.ncols(), k, |start, len| match subset {
        Some(idx) => rows.select_rows(&idx[start..start + len]).map(f64::from),
        None => rows.rows(start, len).map(f64::from),
    })
}

fn fit_impl(
    n: usize,
    d: usize,
    k: usize,
    chunk: impl Fn(usize, usize) -> DMatrix<f64>,
) -> Result<PcaProjector> {
    let max_k = n.min(d);
    if k == 0 || k > max_k {
        return Err(DriftError::Rank {
            scope: RankScope::Pca,
            count: max_k,
            required: k.max(1),
        });
    }

    let chunks = || (0..n).step_by(CHUNK_ROWS).map(move |s| (s, CHUNK_ROWS.min(n - s)));
    let center_chunk = |c: &mut DMatrix<f64>, center: &DVector<f64>| {
        for (j, mut col) in c.column_iter_mut().enumerate() {
            col.add_scalar_mut(-center[j]);
        }
    };

    let mut sum = DVector::<f64>::zeros(d);
    for (s, len) in chunks() {
        let c = chunk(s, len);
        for j in 0..d {
            sum[j] += c.column(j).sum();
        }
    }
    let center = sum / n as f64;

    let (values, mut components) = if n >= d {
        let mut gram = DMatrix::<f64>::zeros(d, d);
        for (s, len) in chunks() {
            let mut c = chunk(s, len);
            center_chunk(&mut c, &center);
            gram.gemm(1.0, &c.transpose(), &c, 1.0);
        }
        let (values, vectors) = sorted_symmetric_eigen(symmetrize(&gram));
        check_rank(&values, n, d, k)?;
        (values, vectors.columns(0, k).transpose())
    } else {
        let mut xc = chunk(0, n);
        center_chunk(&mut xc, &center);
        let gram = &xc * xc.transpose();
        let (values, u) = sorted_symmetric_eigen(symmetrize(&gram));
        check_rank(&values, n, d, k)?;
        let xct = xc.transpose();
        let mut comps = DMatrix::<f64>::zeros(k, d);
        for i in 0..k {
            let mut v = &xct * u.column(i);
            let norm = v.norm();
            v /= norm;
            comps.row_mut(i).copy_from(&v.transpose());
        }
        (values, comps)
    };

    for mut row in components.row_iter_mut() {
        let mut best = 0;
        for (j, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = j;
            }
        }
        if row[best] < 0.0 {
            row.neg_mut();
        }
    }

    let denom = (n.max(2) - 1) as f64;
    let explained_variance = DVector::from_fn(k, |i, _| values[i].max(0.0) / denom);
    Ok(PcaProjector {
        center,
        components,
        explained_variance,
    })
}

fn check_rank(values: &DVector<f64>, n: usize, d: usize, k: usize) -> Result<()> {
    let top = values.get(0).copied().unwrap_or(0.0);
    let rank = if top > 0.0 {
        let tol = top * n.max(d) as f64 * f64::EPSILON;
        values.iter().filter(|&&v| v > tol).count()
    } else {
        0
    };
    if k > rank {
        return Err(DriftError::Rank {
            scope: RankScope::Pca,
            count: rank,
            required: k,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_rows(n: usize, sds: &[f64], seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, sds.len(), |_, j| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * sds[j] + j as f64
        })
    }

    #[test]
    fn line_data_rank_one() {
        let rows = DMatrix::from_fn(20, 2, |i, _| i as f64 * 0.5 - 3.0);
        let p = fit_pca(&rows, 1).unwrap();
        let c = p.components().row(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c[0].abs() - s).abs() < 1e-12 && (c[1].abs() - s).abs() < 1e-12);
        let proj = p.project(&rows).unwrap();
        let total: f64 = estimate_var(&rows).iter().sum();
        assert!((estimate_var(&proj)[0] - total).abs() < 1e-9);
        // only one direction carries variance
        assert!(matches!(fit_pca(&rows, 2), Err(DriftError::Rank { count: 1, .. })));
    }

    fn estimate_var(rows: &DMatrix<f64>) -> Vec<f64> {
        let n = rows.nrows() as f64;
        rows.column_iter()
            .map(|c| {
                let m = c.sum() / n;
                c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
            })
            .collect()
    }

    #[test]
    fn full_basis_preserves_distances_and_reconstructs() {
        let rows = gaussian_rows(50, &[3.0, 2.0, 1.5, 1.0, 0.5], 11);
        let p = fit_pca(&rows, 5).unwrap();
        let proj = p.project(&rows).unwrap();
        for i in 0..rows.nrows() {
            for j in 0..i {
                let a = (rows.row(i) - rows.row(j)).norm();
                let b = (proj.row(i) - proj.row(j)).norm();
                assert!((a - b).abs() < 1e-8);
            }
        }
        let back = p.reconstruct(&proj).unwrap();
        assert!((back - &rows).amax() < 1e-8);
        let gram = p.components() * p.components().transpose();
        assert!((gram - DMatrix::<f64>::identity(5, 5)).amax() < 1e-10);
    }

    #[test]
    fn center_projects_to_zero() {
        let rows = gaussian_rows(40, &[2.0, 1.0, 0.7], 3);
        let p = fit_pca(&rows, 2).unwrap();
        let c = DMatrix::from_row_slice(1, 3, p.center().as_slice());
        assert!(p.project(&c).unwrap().amax() < 1e-12);
    }

    #[test]
    fn first_component_tracks_high_variance_axis() {
        let rows = gaussian_rows(10_000, &[3.0, 1.0], 5);
        let p = fit_pca(&rows, 1).unwrap();
        let c = p.components().row(0);
        let angle = c[1].atan2(c[0]).to_degrees().abs();
        assert!(angle < 5.0, "angle {angle}");
    }

    #[test]
    fn sign_convention_makes_largest_loading_positive() {
        let rows = gaussian_rows(300, &[1.0, 4.0, 2.0, 0.5], 8);
        let p = fit_pca(&rows, 4).unwrap();
        for row in p.components().row_iter() {
            let (idx, _) = row.iter().enumerate().fold((0, 0.0f64), |acc, (j, v)| {
                if v.abs() > acc.1 {
                    (j, v.abs())
                } else {
                    acc
                }
            });
            assert!(row[idx] > 0.0);
        }
    }

    #[test]
    fn wide_data_uses_small_gram() {
        // n < d exercises the XcXcᵀ route
        let rows = gaussian_rows(8, &[5.0, 4.0, 3.0, 2.5, 2.0, 1.5, 1.0, 0.8, 0.6, 0.4, 0.3, 0.2], 21);
        let p = fit_pca(&rows, 7).unwrap();
        let gram = p.components() * p.components().transpose();
        assert!((gram - DMatrix::<f64>::identity(7, 7)).amax() < 1e-9);
        // rank of centered 8 rows is 7
        assert!(matches!(fit_pca(&rows, 8), Err(DriftError::Rank { .. })));
        let proj = p.project(&rows).unwrap();
        let back = p.reconstruct(&proj).unwrap();
        assert!((back - &rows).amax() < 1e-8);
    }

    #[test]
    fn errors() {
        let rows = gaussian_rows(5, &[1.0, 1.0], 1);
        assert!(matches!(fit_pca(&rows, 3), Err(DriftError::Rank { .. })));
        assert!(matches!(fit_pca(&rows, 0), Err(DriftError::Rank { .. })));
        let same = DMatrix::from_element(6, 3, 2.5);
        assert!(matches!(
            fit_pca(&same, 1),
            Err(DriftError::Rank { count: 0, required: 1, .. })
        ));
        let p = fit_pca(&rows, 1).unwrap();
        assert!(matches!(
            p.project(&DMatrix::zeros(2, 3)),
            Err(DriftError::Dimension { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn single_precision_path_matches_double() {
        let rows = gaussian_rows(500, &[4.0, 3.0, 2.0, 1.0, 1.0, 0.5], 99);
        let rows32 = rows.map(|v| v as f32);
        let p = fit_pca_embeddings(&rows32, None, 3).unwrap();
        let exact = p.project(&rows32.map(f64::from)).unwrap();
        let fast = p.project_embeddings(&rows32, None).unwrap();
        assert!((exact - &fast).amax() < 1e-4);
        let subset = [4usize, 1, 1, 300];
        let sub = p.project_embeddings(&rows32, Some(&subset)).unwrap();
        for (r, &i) in subset.iter().enumerate() {
            assert!((sub.row(r) - fast.row(i)).amax() < 1e-6);
        }
        let q = fit_pca_embeddings(&rows32, Some(&subset[..]), 2);
        assert!(q.is_ok());
    }
}

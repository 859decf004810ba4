//! K-means (k-means++ seeding, Lloyd iterations) and silhouette-based
//! selection of the cluster count.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DriftError, Result};
use crate::rng::{derive_seed, stream_rng};

pub const RESTARTS: u64 = 10;
pub const MAX_ITER: usize = 300;
pub const REL_TOL: f64 = 1e-6;
/// Above this many rows the silhouette is computed on a seeded subset.
pub const SILHOUETTE_SAMPLE: usize = 5000;

/// One k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub assignment: Vec<usize>,
    /// k × dim.
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

/// Score of one candidate k in the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTrial {
    pub k: usize,
    /// `None` when k-means could not produce k non-empty clusters.
    pub silhouette: Option<f64>,
    pub inertia: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub centroids: DMatrix<f64>,
    pub silhouette: f64,
    pub inertia: f64,
    /// Every k tried, ascending.
    pub search: Vec<KTrial>,
}

impl ClusteringResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

fn row_norms(x: &DMatrix<f64>) -> Vec<f64> {
    x.row_iter().map(|r| r.norm_squared()).collect()
}

/// Squared distances of every row of `x` to every row of `c` (n × k).
fn sq_distances(x: &DMatrix<f64>, x_norms: &[f64], c: &DMatrix<f64>) -> DMatrix<f64> {
    let c_norms = row_norms(c);
    let mut cross = x * c.transpose();
    for j in 0..c.nrows() {
        for i in 0..x.nrows() {
            cross[(i, j)] = (x_norms[i] + c_norms[j] - 2.0 * cross[(i, j)]).max(0.0);
        }
    }
    cross
}

fn kmeans_pp(x: &DMatrix<f64>, x_norms: &[f64], k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = x.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| (x.row(i) - x.row(chosen[0])).norm_squared())
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for i in 0..n {
            let d = x_norms[i] + x_norms[next] - 2.0 * x.row(i).dot(&x.row(next));
            d2[i] = d2[i].min(d.max(0.0));
        }
    }
    DMatrix::from_fn(k, x.ncols(), |c, j| x[(chosen[c], j)])
}

fn assign(dist: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>) {
    let (n, k) = dist.shape();
    let mut labels = vec![0; n];
    let mut best = vec![f64::INFINITY; n];
    for c in 0..k {
        for i in 0..n {
            if dist[(i, c)] < best[i] {
                best[i] = dist[(i, c)];
                labels[i] = c;
            }
        }
    }
    (labels, best)
}

fn lloyd(x: &DMatrix<f64>, x_norms: &[f64], mut centroids: DMatrix<f64>) -> KMeansRun {
    let (n, d) = x.shape();
    let k = centroids.nrows();
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (new_labels, best) = assign(&sq_distances(x, x_norms, &centroids));
        let inertia: f64 = best.iter().sum();
        trace.push(inertia);
        let changed = new_labels != labels;
        labels = new_labels;
        let mut counts = vec![0usize; k];
        for &c in &labels {
            counts[c] += 1;
        }
        let any_empty = counts.contains(&0);
        if !any_empty && (!changed || prev - inertia <= REL_TOL * prev) {
            break;
        }
        if iterations >= MAX_ITER {
            break;
        }
        prev = inertia;

        let mut sums = DMatrix::<f64>::zeros(k, d);
        for (i, &c) in labels.iter().enumerate() {
            let mut row = sums.row_mut(c);
            row += x.row(i);
        }
        // empty clusters move to the points farthest from their centroid
        let mut far: Vec<usize> = (0..n).collect();
        far.sort_by(|&a, &b| best[b].total_cmp(&best[a]).then(a.cmp(&b)));
        let mut far = far.into_iter();
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.row(c) / counts[c] as f64;
                centroids.set_row(c, &mean);
            } else if let Some(p) = far.next() {
                centroids.set_row(c, &x.row(p));
            }
        }
    }
    KMeansRun {
        inertia: *trace.last().unwrap(),
        assignment: labels,
        centroids,
        inertia_trace: trace,
        iterations,
    }
}

fn all_non_empty(assignment: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    for &c in assignment {
        seen[c] = true;
    }
    seen.iter().all(|&s| s)
}

/// Best of [`RESTARTS`] k-means runs by inertia. `None` if no run ends with
/// `k` non-empty clusters (fewer than `k` distinct points).
pub fn kmeans(rows: &DMatrix<f64>, k: usize, seed: u64) -> Result<Option<KMeansRun>> {
    let n = rows.nrows();
    if k == 0 || k > n {
        return Err(DriftError::InvalidK(format!("k = {k} with {n} rows")));
    }
    let norms = row_norms(rows);
    let mut best: Option<KMeansRun> = None;
    for r in 0..RESTARTS {
        let mut rng = stream_rng(seed, r);
        let run = lloyd(rows, &norms, kmeans_pp(rows, &norms, k, &mut rng));
        if !all_non_empty(&run.assignment, k) {
            continue;
        }
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best)
}

/// Pairwise Euclidean distances between rows.
fn pairwise(x: &DMatrix<f64>) -> DMatrix<f64> {
    let norms = row_norms(x);
    let mut g = x * x.transpose();
    let n = x.nrows();
    for j in 0..n {
        for i in 0..n {
            g[(i, j)] = if i == j {
                0.0
            } else {
                (norms[i] + norms[j] - 2.0 * g[(i, j)]).max(0.0).sqrt()
            };
        }
    }
    g
}

/// Mean silhouette from a precomputed distance matrix. Points in singleton
/// clusters score 0.
pub fn silhouette_from_distances(dist: &DMatrix<f64>, assignment: &[usize], k: usize) -> f64 {
    let n = assignment.len();
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            sums[assignment[j]] += dist[(i, j)];
        }
        let own = assignment[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 && b.is_finite() {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Mean silhouette of `assignment` over `rows` (exact pairwise).
pub fn silhouette(rows: &DMatrix<f64>, assignment: &[usize], k: usize) -> f64 {
    silhouette_from_distances(&pairwise(rows), assignment, k)
}

/// Runs k-means for every k in `2..=k_max` and keeps the k with the highest
/// silhouette; ties go to the smaller k.
pub fn cluster_select(rows: &DMatrix<f64>, k_max: usize, seed: u64) -> Result<ClusteringResult> {
    let n = rows.nrows();
    if k_max < 2 {
        return Err(DriftError::InvalidK(format!("k_max must be at least 2, got {k_max}")));
    }
    if n < k_max {
        return Err(DriftError::InvalidK(format!("{n} rows cannot form {k_max} clusters")));
    }
    let mean = rows.row_mean();
    let variance: f64 = rows.row_iter().map(|r| (r - &mean).norm_squared()).sum();
    if !(variance > 0.0) {
        return Err(DriftError::DegenerateData(
            "rows have zero total variance".into(),
        ));
    }

    // silhouettes are scored on a fixed subset so every k sees the same points
    let subset: Option<Vec<usize>> = (n > SILHOUETTE_SAMPLE).then(|| {
        let mut rng = stream_rng(derive_seed(seed, u64::MAX), 0);
        let mut idx = sample(&mut rng, n, SILHOUETTE_SAMPLE).into_vec();
        idx.sort_unstable();
        idx
    });
    let dist = match &subset {
        Some(idx) => pairwise(&rows.select_rows(idx)),
        None => pairwise(rows),
    };

    let runs: Vec<(usize, Option<KMeansRun>)> = (2..=k_max)
        .into_par_iter()
        .map(|k| kmeans(rows, k, derive_seed(seed, k as u64)).map(|r| (k, r)))
        .collect::<Result<_>>()?;

    let mut search = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, usize, KMeansRun)> = None;
    for (k, run) in runs {
        let Some(run) = run else {
            search.push(KTrial {
                k,
                silhouette: None,
                inertia: None,
            });
            continue;
        };
        let s = match &subset {
            Some(idx) => {
                let a: Vec<usize> = idx.iter().map(|&i| run.assignment[i]).collect();
                silhouette_from_distances(&dist, &a, k)
            }
            None => silhouette_from_distances(&dist, &run.assignment, k),
        };
        search.push(KTrial {
            k,
            silhouette: Some(s),
            inertia: Some(run.inertia),
        });
        if best.as_ref().is_none_or(|(bs, _, _)| s > *bs) {
            best = Some((s, k, run));
        }
    }
    let (silhouette, k, run) = best.ok_or_else(|| {
        DriftError::DegenerateData("no cluster count produced non-empty clusters".into())
    })?;
    Ok(ClusteringResult {
        k,
        assignment: run.assignment,
        centroids: run.centroids,
        silhouette,
        inertia: run.inertia,
        search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    pub(crate) fn blobs(centers: &[Vec<f64>], per: usize, sigma: f64, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, 0);
        let d = centers[0].len();
        let n = centers.len() * per;
        let mut m = DMatrix::zeros(n, d);
        for i in 0..n {
            let c = &centers[i / per];
            for j in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                m[(i, j)] = c[j] + sigma * z;
            }
        }
        m
    }

    #[test]
    fn two_blobs() {
        let x = blobs(&[vec![0.0, 0.0], vec![10.0, 0.0]], 60, 1.0, 1);
        let r = cluster_select(&x, 10, 7).unwrap();
        assert_eq!(r.k, 2);
        assert!(r.silhouette > 0.8, "{}", r.silhouette);
        assert_eq!(r.search.len(), 9);
        for t in &r.search {
            if let Some(s) = t.silhouette {
                assert!(s <= r.silhouette);
            }
        }
    }

    #[test]
    fn three_blobs() {
        let x = blobs(
            &[vec![0.0, 0.0, 0.0], vec![10.0, 0.0, 0.0], vec![0.0, 10.0, 0.0]],
            50,
            1.0,
            2,
        );
        assert_eq!(cluster_select(&x, 6, 3).unwrap().k, 3);
    }

    #[test]
    fn lloyd_is_monotone_and_stops_at_a_fixed_point() {
        let x = blobs(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]], 40, 1.0, 4);
        let run = kmeans(&x, 4, 11).unwrap().unwrap();
        for w in run.inertia_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        for i in 0..x.nrows() {
            let own = (x.row(i) - run.centroids.row(run.assignment[i])).norm();
            for c in 0..4 {
                assert!(own <= (x.row(i) - run.centroids.row(c)).norm() + 1e-9);
            }
        }
    }

    #[test]
    fn errors_and_determinism() {
        let same = DMatrix::from_element(20, 3, 1.5);
        assert!(matches!(cluster_select(&same, 3, 0), Err(DriftError::DegenerateData(_))));
        let x = blobs(&[vec![0.0, 0.0], vec![5.0, 5.0]], 5, 1.0, 5);
        assert!(matches!(cluster_select(&x, 11, 0), Err(DriftError::InvalidK(_))));
        assert!(matches!(cluster_select(&x, 1, 0), Err(DriftError::InvalidK(_))));
        assert_eq!(cluster_select(&x, 4, 9).unwrap(), cluster_select(&x, 4, 9).unwrap());
    }

    #[test]
    fn few_distinct_points_skip_large_k() {
        let mut x = DMatrix::zeros(12, 2);
        for i in 0..12 {
            x[(i, 0)] = (i % 3) as f64 * 4.0;
        }
        let r = cluster_select(&x, 5, 1).unwrap();
        assert_eq!(r.k, 3);
        assert!(r.search.iter().any(|t| t.silhouette.is_none()));
    }

    #[test]
    fn silhouette_hand_example() {
        // points 0, 1 | 10: a(0)=1, b(0)=10 → 0.9; a(1)=1, b(1)=9 → 8/9; singleton → 0
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 10.0]);
        let s = silhouette(&x, &[0, 0, 1], 2);
        assert!((s - (0.9 + 8.0 / 9.0) / 3.0).abs() < 1e-12);
    }
}

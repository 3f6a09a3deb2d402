//! Lloyd k-means with distance-weighted (k-means++ style) seeding.
//!
//! Runs are seeded and fully deterministic: restarts draw from one seeded
//! generator, ties in assignment go to the smaller cluster index, and the
//! best restart is the first one reaching the lowest inertia.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("cannot form {k} clusters from {n} points")]
    InvalidClusterCount { k: usize, n: usize },
    #[error("restarts must be at least 1")]
    ZeroRestarts,
    #[error("points contain a non-finite value")]
    NonFinite,
}

/// Settings for [`kmeans`]. `new` fills in the defaults used throughout the
/// evaluation harness: 10 restarts, 300 iterations per restart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            restarts: 10,
            max_iter: 300,
        }
    }
}

/// Outcome of the best restart.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    labels: Vec<u32>,
    inertia: f64,
    iterations: usize,
}

impl ClusteringResult {
    /// Cluster index per row.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Sum of squared distances to assigned centroids.
    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    /// Lloyd iterations performed by the winning restart.
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}

/// Distance-weighted seeding: the first centroid is uniform, each next one
/// is drawn with probability proportional to the squared distance from the
/// centroids chosen so far.
fn seed_centroids(points: &DenseMatrix, k: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let (n, p) = (points.n_rows(), points.n_cols());
    let mut centroids = Vec::with_capacity(k * p);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(points.row(first));
    let mut min_d2: Vec<f64> = (0..n)
        .map(|i| dist2(points.row(i), &centroids[0..p]))
        .collect();
    for c in 1..k {
        let total: f64 = min_d2.iter().sum();
        let chosen = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut cumulative = 0.0;
            let mut pick = n - 1;
            for (i, &w) in min_d2.iter().enumerate() {
                cumulative += w;
                if target < cumulative {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // Every point coincides with an existing centroid.
            rng.random_range(0..n)
        };
        centroids.extend_from_slice(points.row(chosen));
        let start = c * p;
        for i in 0..n {
            let dd = dist2(points.row(i), &centroids[start..start + p]);
            if dd < min_d2[i] {
                min_d2[i] = dd;
            }
        }
    }
    centroids
}

/// Nearest-centroid assignment; ties go to the smaller cluster index.
fn assign_labels(points: &DenseMatrix, centroids: &[f64], k: usize) -> Vec<u32> {
    let (n, p) = (points.n_rows(), points.n_cols());
    let mut labels = vec![0u32; n];
    for i in 0..n {
        let row = points.row(i);
        let mut best = 0u32;
        let mut best_d2 = dist2(row, &centroids[0..p]);
        for c in 1..k {
            let dd = dist2(row, &centroids[c * p..(c + 1) * p]);
            if dd < best_d2 {
                best = c as u32;
                best_d2 = dd;
            }
        }
        labels[i] = best;
    }
    labels
}

/// Moves each centroid to the mean of its members. An empty cluster is
/// respawned on the point farthest from its current centroid (ties to the
/// smaller row index), one empty cluster at a time.
fn update_centroids(points: &DenseMatrix, labels: &[u32], centroids: &mut [f64], k: usize) {
    let (n, p) = (points.n_rows(), points.n_cols());
    let mut counts = vec![0u64; k];
    centroids.fill(0.0);
    for i in 0..n {
        let c = labels[i] as usize;
        counts[c] += 1;
        let row = points.row(i);
        for t in 0..p {
            centroids[c * p + t] += row[t];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            for t in 0..p {
                centroids[c * p + t] *= inv;
            }
        }
    }
    let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    if empties.is_empty() {
        return;
    }
    let mut taken = vec![false; n];
    for &c in &empties {
        let mut far_i = 0;
        let mut far_d2 = -1.0;
        for i in 0..n {
            if taken[i] {
                continue;
            }
            let owner = labels[i] as usize;
            let dd = dist2(points.row(i), &centroids[owner * p..(owner + 1) * p]);
            if dd > far_d2 {
                far_d2 = dd;
                far_i = i;
            }
        }
        taken[far_i] = true;
        let row = points.row(far_i);
        centroids[c * p..(c + 1) * p].copy_from_slice(row);
    }
}

fn total_inertia(points: &DenseMatrix, centroids: &[f64], labels: &[u32]) -> f64 {
    let p = points.n_cols();
    let mut acc = 0.0;
    for i in 0..points.n_rows() {
        let c = labels[i] as usize;
        acc += dist2(points.row(i), &centroids[c * p..(c + 1) * p]);
    }
    acc
}

/// Clusters the rows of `points` into `cfg.k` groups, keeping the restart
/// with the lowest inertia. Requires `1 <= k <= n`, at least one restart,
/// and finite inputs. With `max_iter = 0` the result is the assignment to
/// the seeded centroids, with no Lloyd updates.
pub fn kmeans(points: &DenseMatrix, cfg: &KMeansConfig) -> Result<ClusteringResult, ClusterError> {
    let n = points.n_rows();
    if cfg.k == 0 || cfg.k > n {
        return Err(ClusterError::InvalidClusterCount { k: cfg.k, n });
    }
    if cfg.restarts == 0 {
        return Err(ClusterError::ZeroRestarts);
    }
    if points.values().iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut best: Option<ClusteringResult> = None;
    for _ in 0..cfg.restarts {
        let mut centroids = seed_centroids(points, cfg.k, &mut rng);
        let mut labels = assign_labels(points, &centroids, cfg.k);
        let mut iterations = 0;
        for _ in 0..cfg.max_iter {
            update_centroids(points, &labels, &mut centroids, cfg.k);
            let new_labels = assign_labels(points, &centroids, cfg.k);
            iterations += 1;
            let converged = new_labels == labels;
            labels = new_labels;
            if converged {
                break;
            }
        }
        let inertia = total_inertia(points, &centroids, &labels);
        if best.as_ref().map_or(true, |b| inertia < b.inertia) {
            best = Some(ClusteringResult {
                labels,
                inertia,
                iterations,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

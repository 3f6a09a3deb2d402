//! Normalized inner-product kernel over block representations.
//!
//! `K[m][n] = <z_m, z_n> / d` where `z` rows concatenate `d` per-feature
//! blocks. Because every block is a distribution over `n_bins` entries in
//! `[0, 1]`, kernel values stay in `[0, 1]`, and `K = Z Zᵀ / d` is positive
//! semi-definite by construction.
//!
//! [`min_eigenvalue`] verifies that property numerically: it reduces the
//! matrix to tridiagonal form with Householder reflections and extracts
//! eigenvalues by implicit-shift QL iteration, the classic dense-symmetric
//! route, implemented here directly so the crate stays `no_std`.

use alloc::vec;
use alloc::vec::Vec;

use crate::encoder::Representation;
use crate::math;

/// Cap on QL iterations per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("representation widths differ: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("feature count must be positive")]
    ZeroFeatures,
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
}

/// Symmetric `n x n` kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    /// Row-major entries.
    data: Vec<f64>,
}

impl GramMatrix {
    /// Wraps a row-major buffer. Panics if `data.len() != n * n`.
    pub fn new(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            n * n,
            "buffer length {} for n = {n}",
            data.len()
        );
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// The backing row-major buffer.
    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Kernel value between two representation rows of equal width:
/// `<zm, zn> / d`. `d` is the number of features (blocks) per row.
pub fn kernel_value(zm: &[f64], zn: &[f64], d: usize) -> Result<f64, KernelError> {
    if zm.len() != zn.len() {
        return Err(KernelError::WidthMismatch {
            left: zm.len(),
            right: zn.len(),
        });
    }
    if d == 0 {
        return Err(KernelError::ZeroFeatures);
    }
    let dot: f64 = zm.iter().zip(zn.iter()).map(|(a, b)| a * b).sum();
    Ok(dot / d as f64)
}

/// Builds the full kernel matrix of a representation.
///
/// Exploits block sparsity: blocks that are exact one-hot vectors (every
/// observed cell, and any estimate that collapsed to a single bin)
/// contribute via a bin comparison or single lookup instead of a dense dot
/// product. The result is identical to running [`kernel_value`] per pair —
/// the skipped terms are exact zeros. The upper triangle is computed once
/// and mirrored, so the matrix is exactly symmetric.
pub fn gram(rep: &Representation) -> GramMatrix {
    let (n, d, n_bins) = (rep.n(), rep.d(), rep.n_bins());
    const NOT_HOT: u32 = u32::MAX;

    // Classify each block by content: `hot[i*d + j]` is the index of the
    // single 1.0 entry, or NOT_HOT for mixed blocks.
    let mut hot = vec![NOT_HOT; n * d];
    for i in 0..n {
        for j in 0..d {
            let block = rep.block(i, j);
            let mut ones = 0usize;
            let mut hot_k = 0usize;
            let mut clean = true;
            for (k, &v) in block.iter().enumerate() {
                if v == 1.0 {
                    ones += 1;
                    hot_k = k;
                } else if v != 0.0 {
                    clean = false;
                    break;
                }
            }
            if clean && ones == 1 {
                hot[i * d + j] = hot_k as u32;
            }
        }
    }

    let inv_d = 1.0 / d as f64;
    let mut data = vec![0.0; n * n];
    for m in 0..n {
        for i in m..n {
            let mut acc = 0.0;
            for j in 0..d {
                let hm = hot[m * d + j];
                let hi = hot[i * d + j];
                if hm != NOT_HOT && hi != NOT_HOT {
                    if hm == hi {
                        acc += 1.0;
                    }
                } else if hm != NOT_HOT {
                    acc += rep.block(i, j)[hm as usize];
                } else if hi != NOT_HOT {
                    acc += rep.block(m, j)[hi as usize];
                } else {
                    let bm = rep.block(m, j);
                    let bi = rep.block(i, j);
                    let mut dot = 0.0;
                    for k in 0..n_bins {
                        dot += bm[k] * bi[k];
                    }
                    acc += dot;
                }
            }
            let v = acc * inv_d;
            data[m * n + i] = v;
            data[i * n + m] = v;
        }
    }
    GramMatrix { n, data }
}

/// Smallest eigenvalue of a symmetric matrix (Householder reduction to
/// tridiagonal form, then implicit-shift QL iteration).
pub fn min_eigenvalue(gm: &GramMatrix) -> Result<f64, KernelError> {
    let eigenvalues = symmetric_eigenvalues(gm)?;
    Ok(eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of a symmetric matrix, in no particular order.
fn symmetric_eigenvalues(gm: &GramMatrix) -> Result<Vec<f64>, KernelError> {
    let n = gm.n();
    if gm.values().iter().any(|v| !v.is_finite()) {
        return Err(KernelError::NonFinite);
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        return Ok(vec![gm.get(0, 0)]);
    }
    let mut a = gm.values().to_vec();
    householder_tridiagonalize(&mut a, n, &mut d, &mut e);
    tridiagonal_eigenvalues(&mut d, &mut e, n)?;
    Ok(d)
}

/// Reduces symmetric `a` (row-major, destroyed) to tridiagonal form via
/// Householder reflections; on return `d` holds the diagonal and `e[1..]`
/// the subdiagonal.
fn householder_tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += math::abs(a[i * n + k]);
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                let mut h = 0.0;
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 {
                    -math::sqrt(h)
                } else {
                    math::sqrt(h)
                };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_sum = 0.0;
                for j in 0..=l {
                    let mut g_sum = 0.0;
                    for k in 0..=j {
                        g_sum += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g_sum += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g_sum / h;
                    f_sum += e[j] * a[i * n + j];
                }
                let hh = f_sum / (h + h);
                for j in 0..=l {
                    let fj = a[i * n + j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        a[j * n + k] -= fj * e[k] + gj * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix (`d` diagonal,
/// `e[1..]` subdiagonal); eigenvalues land in `d`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64], n: usize) -> Result<(), KernelError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    // Deflation must also compare against the overall matrix scale: a purely
    // local test (`|e| <= eps * (|d[m]| + |d[m+1]|)`) can never fire inside a
    // cluster of near-zero eigenvalues, which rank-deficient gram matrices
    // produce in bulk. Perturbation from this threshold is O(n * eps * anorm),
    // far below the accuracy the callers need.
    let mut anorm = 0.0f64;
    for i in 0..n {
        let row = math::abs(d[i]) + math::abs(e[i]);
        if row > anorm {
            anorm = row;
        }
    }
    for l in 0..n {
        let mut iterations = 0;
        loop {
            // Find the first negligible subdiagonal element at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(d[m]) + math::abs(d[m + 1]);
                if math::abs(e[m]) <= f64::EPSILON * (dd + anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(KernelError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + math::sign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Rotation annihilated early: drop the shift and retry.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::fit_bin_centers;
    use crate::dataset::Dataset;
    use crate::encoder::encode_dataset;
    use alloc::vec;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const NAN: f64 = f64::NAN;

    fn encode(d: usize, n_bins: usize, cells: &[f64]) -> Representation {
        let missing: Vec<bool> = cells.iter().map(|v| v.is_nan()).collect();
        let ds = Dataset::from_numeric(d, cells.to_vec(), missing).unwrap();
        let model = fit_bin_centers(&ds, n_bins).unwrap();
        encode_dataset(&ds, &model).unwrap()
    }

    #[test]
    fn kernel_value_counts_shared_bins() {
        assert_eq!(
            kernel_value(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1).unwrap(),
            1.0
        );
        assert_eq!(
            kernel_value(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 1).unwrap(),
            0.0
        );
        assert_eq!(
            kernel_value(&[1.0, 0.0, 1.0, 0.0], &[1.0, 0.0, 0.0, 1.0], 2).unwrap(),
            0.5
        );
        // Estimated blocks contribute fractionally.
        assert_eq!(
            kernel_value(&[1.0, 0.0, 0.5, 0.5], &[1.0, 0.0, 0.5, 0.5], 2).unwrap(),
            0.75
        );
    }

    #[test]
    fn kernel_value_validates_inputs() {
        assert_eq!(
            kernel_value(&[1.0, 0.0], &[1.0], 1).unwrap_err(),
            KernelError::WidthMismatch { left: 2, right: 1 }
        );
        assert_eq!(
            kernel_value(&[1.0], &[1.0], 0).unwrap_err(),
            KernelError::ZeroFeatures
        );
    }

    #[test]
    fn gram_matches_hand_computed_fixture() {
        // Rows: A (0,0), B (0,10), C (10,0), D (0,?) with two bins per
        // feature; D's second block is the intersection estimate [.5, .5].
        let rep = encode(2, 2, &[0.0, 0.0, 0.0, 10.0, 10.0, 0.0, 0.0, NAN]);
        let gm = gram(&rep);
        let expected = [
            [1.0, 0.5, 0.5, 0.75],
            [0.5, 1.0, 0.0, 0.75],
            [0.5, 0.0, 1.0, 0.25],
            [0.75, 0.75, 0.25, 0.75],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(gm.get(i, j), expected[i][j], "entry ({i}, {j})");
            }
        }
    }

    #[test]
    fn gram_diagonal_dips_below_one_only_for_estimated_rows() {
        let rep = encode(2, 2, &[0.0, 0.0, 0.0, 10.0, 10.0, 0.0, 0.0, NAN]);
        let gm = gram(&rep);
        assert_eq!(gm.get(0, 0), 1.0);
        // D's estimate spreads mass across bins, so ||z_D||^2 < d.
        assert_eq!(gm.get(3, 3), 0.75);
    }

    #[test]
    fn gram_is_exactly_symmetric_with_unit_range() {
        let cells = [
            0.0, 10.0, NAN, NAN, 0.0, 0.0, 0.0, 4.0, 10.0, 10.0, 10.0, NAN, 0.0, NAN, 2.0, 5.0,
            NAN, NAN, NAN, NAN, 7.0, 1.0, 9.0, 3.0,
        ];
        let rep = encode(4, 3, &cells);
        let gm = gram(&rep);
        for i in 0..gm.n() {
            for j in 0..gm.n() {
                let v = gm.get(i, j);
                assert_eq!(v.to_bits(), gm.get(j, i).to_bits());
                assert!((0.0..=1.0).contains(&v), "entry ({i}, {j}) = {v}");
            }
        }
    }

    #[test]
    fn gram_agrees_with_pairwise_kernel_value() {
        let cells = [
            0.0, 10.0, NAN, NAN, 0.0, 0.0, 0.0, 4.0, 10.0, 10.0, 10.0, NAN, 0.0, NAN, 2.0, 5.0,
            NAN, NAN, NAN, NAN, 7.0, 1.0, 9.0, 3.0,
        ];
        let rep = encode(4, 3, &cells);
        let gm = gram(&rep);
        for i in 0..rep.n() {
            for j in 0..rep.n() {
                let direct = kernel_value(rep.row(i), rep.row(j), rep.d()).unwrap();
                assert!(
                    math::abs(gm.get(i, j) - direct) < 1e-12,
                    "entry ({i}, {j}): {} vs {direct}",
                    gm.get(i, j)
                );
            }
        }
    }

    #[test]
    fn identical_rows_have_unit_similarity() {
        let rep = encode(3, 2, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 9.0, 8.0, 7.0]);
        let gm = gram(&rep);
        assert_eq!(gm.get(0, 1), 1.0);
        assert_eq!(gm.get(0, 0), 1.0);
    }

    #[test]
    fn single_row_gram() {
        let rep = encode(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let gm = gram(&rep);
        assert_eq!(gm.n(), 2);
        assert_eq!(gm.get(0, 0), 1.0);
    }

    #[test]
    fn min_eigenvalue_on_known_matrices() {
        let m = GramMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(math::abs(min_eigenvalue(&m).unwrap() - (-1.0)) < 1e-10);

        let m = GramMatrix::new(2, vec![2.0, 0.0, 0.0, 3.0]);
        assert!(math::abs(min_eigenvalue(&m).unwrap() - 2.0) < 1e-10);

        let m = GramMatrix::new(1, vec![5.0]);
        assert_eq!(min_eigenvalue(&m).unwrap(), 5.0);

        let m = GramMatrix::new(4, {
            let mut d = vec![0.0; 16];
            for (i, v) in [4.0, -2.0, 7.0, 0.5].into_iter().enumerate() {
                d[i * 4 + i] = v;
            }
            d
        });
        assert!(math::abs(min_eigenvalue(&m).unwrap() - (-2.0)) < 1e-10);
    }

    #[test]
    fn min_eigenvalue_rejects_non_finite() {
        let m = GramMatrix::new(2, vec![1.0, NAN, NAN, 1.0]);
        assert_eq!(min_eigenvalue(&m).unwrap_err(), KernelError::NonFinite);
    }

    #[test]
    fn eigenvalues_preserve_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for n in [2usize, 3, 5, 8] {
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v = rng.random::<f64>() * 2.0 - 1.0;
                    data[i * n + j] = v;
                    data[j * n + i] = v;
                }
            }
            let trace: f64 = (0..n).map(|i| data[i * n + i]).sum();
            let gm = GramMatrix::new(n, data);
            let eigenvalues = symmetric_eigenvalues(&gm).unwrap();
            let sum: f64 = eigenvalues.iter().sum();
            assert!(math::abs(sum - trace) < 1e-9, "n = {n}: {sum} vs {trace}");
        }
    }

    /// Independent eigenvalue oracle: cyclic Jacobi rotations.
    fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
        for _sweep in 0..200 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
            if math::sqrt(off) < 1e-12 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if math::abs(apq) < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    let t = sgn / (math::abs(theta) + math::sqrt(theta * theta + 1.0));
                    let c = 1.0 / math::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }

    #[test]
    fn ql_agrees_with_jacobi_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for trial in 0..20 {
            let n = 2 + (trial % 11);
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v = rng.random::<f64>() * 4.0 - 2.0;
                    data[i * n + j] = v;
                    data[j * n + i] = v;
                }
            }
            let gm = GramMatrix::new(n, data.clone());
            let mut ours = symmetric_eigenvalues(&gm).unwrap();
            let mut oracle = jacobi_eigenvalues(data, n);
            ours.sort_unstable_by(f64::total_cmp);
            oracle.sort_unstable_by(f64::total_cmp);
            for (x, y) in ours.iter().zip(oracle.iter()) {
                assert!(math::abs(x - y) < 1e-8, "trial {trial}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn encoded_gram_is_positive_semidefinite() {
        let cells = [
            0.0, 10.0, NAN, NAN, 0.0, 0.0, 0.0, 4.0, 10.0, 10.0, 10.0, NAN, 0.0, NAN, 2.0, 5.0,
            NAN, NAN, NAN, NAN, 7.0, 1.0, 9.0, 3.0,
        ];
        let rep = encode(4, 3, &cells);
        let gm = gram(&rep);
        assert!(min_eigenvalue(&gm).unwrap() >= -1e-9);
    }

    #[test]
    fn eigensolver_converges_on_rank_deficient_gram() {
        // 240 rows over 8 repeated bit patterns with 2 bins per feature: the
        // gram matrix has rank at most 6, so over 230 eigenvalues sit in a
        // cluster at zero. A deflation test that only compares subdiagonals
        // against their local neighbours stalls here.
        let (n, d) = (240usize, 3usize);
        let mut cells = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                if (i + j) % 7 == 0 {
                    cells.push(NAN);
                } else {
                    cells.push(((i >> j) & 1) as f64 * 10.0);
                }
            }
        }
        let rep = encode(d, 2, &cells);
        let gm = gram(&rep);
        let eigenvalues = symmetric_eigenvalues(&gm).unwrap();
        let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8, "min eigenvalue {min}");
        let near_zero = eigenvalues.iter().filter(|v| math::abs(**v) < 1e-8).count();
        assert!(
            near_zero > 200,
            "expected a large zero cluster, got {near_zero}"
        );
        let trace: f64 = (0..n).map(|i| gm.get(i, i)).sum();
        let sum: f64 = eigenvalues.iter().sum();
        assert!(math::abs(sum - trace) < 1e-7, "{sum} vs {trace}");
    }
}

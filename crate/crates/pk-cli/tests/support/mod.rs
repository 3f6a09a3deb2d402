//! Plain-loop reference implementation of the encoding pipeline, used only
//! by the acceptance tests. It is deliberately naive — per-row O(n^2 d) set
//! scans, no grouping, no inverted index, dense blocks — so the library's
//! batched implementation can be checked against an independently computed
//! answer, bit for bit.

use pk_core::{Dataset, FallbackLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub struct BruteEncoding {
    pub n: usize,
    pub d: usize,
    pub n_bins: usize,
    /// Row-major rows of `d * n_bins` values, feature block `j` at
    /// `[(i * d + j) * n_bins ..][.. n_bins]`.
    pub z: Vec<f64>,
    pub levels: Vec<FallbackLevel>,
}

/// Equal-frequency centers: center `k` of a feature sits at the
/// `k * 100 / (n_bins - 1)` percentile (linear interpolation between order
/// statistics) of that feature's observed values.
fn brute_centers(ds: &Dataset, n_bins: usize) -> Vec<Vec<f64>> {
    (0..ds.d())
        .map(|j| {
            let mut vals: Vec<f64> = (0..ds.n()).filter_map(|i| ds.get(i, j)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).expect("observed values are finite"));
            let m = vals.len();
            (0..n_bins)
                .map(|k| {
                    if m == 1 {
                        return vals[0];
                    }
                    let q = k as f64 * 100.0 / (n_bins - 1) as f64;
                    let h = (m - 1) as f64 * q / 100.0;
                    let lo = h.floor() as usize;
                    let hi = (lo + 1).min(m - 1);
                    vals[lo] + (h - lo as f64) * (vals[hi] - vals[lo])
                })
                .collect()
        })
        .collect()
}

/// Nearest center per observed cell, ties to the smaller index.
fn brute_bins(ds: &Dataset, centers: &[Vec<f64>]) -> Vec<Option<usize>> {
    let (n, d) = (ds.n(), ds.d());
    let mut bins = vec![None; n * d];
    for i in 0..n {
        for j in 0..d {
            if let Some(v) = ds.get(i, j) {
                let cs = &centers[j];
                let mut best = 0usize;
                for (k, &c) in cs.iter().enumerate().skip(1) {
                    if (v - c).abs() < (v - cs[best]).abs() {
                        best = k;
                    }
                }
                bins[i * d + j] = Some(best);
            }
        }
    }
    bins
}

/// Encodes `ds` exactly as the library pipeline should: one-hot observed
/// cells, then per missing cell the average block over rows matching on all
/// observed features, else over rows matching on at least one, else the
/// feature's global bin distribution. Rows observing nothing get all-prior
/// blocks.
pub fn brute_encode(ds: &Dataset, n_bins: usize) -> BruteEncoding {
    let (n, d) = (ds.n(), ds.d());
    let centers = brute_centers(ds, n_bins);
    let bins = brute_bins(ds, &centers);
    let at = |i: usize, j: usize| bins[i * d + j];

    let priors: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut counts = vec![0.0f64; n_bins];
            let mut total = 0.0f64;
            for i in 0..n {
                if let Some(b) = at(i, j) {
                    counts[b] += 1.0;
                    total += 1.0;
                }
            }
            counts.iter().map(|c| c / total).collect()
        })
        .collect();

    // Average one-hot block of feature `j` over the members observing it.
    let estimate = |members: &[usize], j: usize| -> Option<Vec<f64>> {
        let mut sums = vec![0.0f64; n_bins];
        let mut count = 0.0f64;
        for &r in members {
            if let Some(b) = at(r, j) {
                sums[b] += 1.0;
                count += 1.0;
            }
        }
        if count == 0.0 {
            None
        } else {
            Some(sums.iter().map(|s| s / count).collect())
        }
    };

    let mut z = vec![0.0f64; n * d * n_bins];
    let mut levels = vec![FallbackLevel::Observed; n * d];
    for i in 0..n {
        let observed: Vec<usize> = (0..d).filter(|&j| at(i, j).is_some()).collect();
        for &j in &observed {
            z[(i * d + j) * n_bins + at(i, j).unwrap()] = 1.0;
        }
        let missing: Vec<usize> = (0..d).filter(|&j| at(i, j).is_none()).collect();
        if missing.is_empty() {
            continue;
        }
        if observed.is_empty() {
            for &j in &missing {
                z[(i * d + j) * n_bins..][..n_bins].copy_from_slice(&priors[j]);
                levels[i * d + j] = FallbackLevel::Prior;
            }
            continue;
        }
        let all_match: Vec<usize> = (0..n)
            .filter(|&r| r != i && observed.iter().all(|&j| at(r, j) == at(i, j)))
            .collect();
        let any_match: Vec<usize> = (0..n)
            .filter(|&r| {
                r != i
                    && observed
                        .iter()
                        .any(|&j| at(r, j).is_some() && at(r, j) == at(i, j))
            })
            .collect();
        for &j in &missing {
            let (dist, level) = if let Some(dist) = estimate(&all_match, j) {
                (dist, FallbackLevel::Intersection)
            } else if let Some(dist) = estimate(&any_match, j) {
                (dist, FallbackLevel::Union)
            } else {
                (priors[j].clone(), FallbackLevel::Prior)
            };
            z[(i * d + j) * n_bins..][..n_bins].copy_from_slice(&dist);
            levels[i * d + j] = level;
        }
    }
    BruteEncoding {
        n,
        d,
        n_bins,
        z,
        levels,
    }
}

/// Small random dataset (integer-valued cells, heavy Bernoulli missing mask,
/// every feature kept observed somewhere) plus a bin count for it.
pub fn micro_dataset(seed: u64) -> (Dataset, usize) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=20);
    let d = rng.random_range(1..=4);
    let n_bins = rng.random_range(2..=3);
    let mut values = Vec::with_capacity(n * d);
    let mut missing = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        values.push(rng.random_range(0..5) as f64);
        missing.push(rng.random::<f64>() < 0.5);
    }
    for j in 0..d {
        if (0..n).all(|i| missing[i * d + j]) {
            let i = rng.random_range(0..n);
            missing[i * d + j] = false;
        }
    }
    (
        Dataset::from_numeric(d, values, missing).expect("generator produced a valid dataset"),
        n_bins,
    )
}

//! Seeded synthetic dataset generators for benchmarks and tests.

use pk_core::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// `n x d` complete dataset of independent draws from `U[0, 1)`.
pub fn uniform(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
    let missing = vec![false; n * d];
    Dataset::from_numeric(d, values, missing).expect("uniform generator produced invalid data")
}

/// `k` Gaussian-free blobs: cluster centers drawn from `U[0, 10)^d`, each
/// point its center plus independent `U(-spread, spread)` jitter. Row `i`
/// belongs to cluster `i % k`, which is also its label.
pub fn blobs(n: usize, d: usize, k: usize, spread: f64, seed: u64) -> Dataset {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let centers: Vec<f64> = (0..k * d).map(|_| rng.random::<f64>() * 10.0).collect();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        for j in 0..d {
            let jitter = (rng.random::<f64>() * 2.0 - 1.0) * spread;
            values.push(centers[c * d + j] + jitter);
        }
        labels.push(c as u32);
    }
    Dataset::from_numeric(d, values, vec![false; n * d])
        .and_then(|ds| ds.with_labels(labels))
        .expect("blob generator produced invalid data")
}

/// `k` clusters over integer codes `0..n_values`: each cluster has a random
/// prototype row, and every cell independently mutates to a fresh uniform
/// code with probability `flip_prob`. Row `i` belongs to cluster `i % k`.
pub fn discrete_blobs(
    n: usize,
    d: usize,
    k: usize,
    n_values: u32,
    flip_prob: f64,
    seed: u64,
) -> Dataset {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    assert!(n_values >= 2, "need at least two codes");
    assert!(
        (0.0..=1.0).contains(&flip_prob),
        "flip_prob must be in [0, 1]"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let prototypes: Vec<u32> = (0..k * d).map(|_| rng.random_range(0..n_values)).collect();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        for j in 0..d {
            let code = if rng.random::<f64>() < flip_prob {
                rng.random_range(0..n_values)
            } else {
                prototypes[c * d + j]
            };
            values.push(code as f64);
        }
        labels.push(c as u32);
    }
    Dataset::from_numeric(d, values, vec![false; n * d])
        .and_then(|ds| ds.with_labels(labels))
        .expect("discrete blob generator produced invalid data")
}

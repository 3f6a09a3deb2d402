//! Mean/mode imputation baseline.
//!
//! Fills missing numeric cells with the feature's observed mean and missing
//! categorical cells with its observed mode (smallest code on ties),
//! producing a dense matrix. [`min_max_scale`] then maps each column to
//! `[0, 1]` so k-means distances are comparable across features.

use alloc::vec::Vec;

use crate::dataset::{Dataset, FeatureKind};
use crate::matrix::DenseMatrix;

/// Most frequent value; ties go to the smallest value. `values` must be
/// non-empty.
fn mode(values: &mut Vec<f64>) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mut best = values[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] == values[i] {
            j += 1;
        }
        if j - i > best_count {
            best_count = j - i;
            best = values[i];
        }
        i = j;
    }
    best
}

/// Dense copy of the dataset with every missing cell replaced by its
/// feature's observed mean (numeric) or mode (categorical). Infallible:
/// datasets guarantee at least one observed value per feature.
pub fn mean_impute(ds: &Dataset) -> DenseMatrix {
    let (n, d) = (ds.n(), ds.d());
    let mut fill = Vec::with_capacity(d);
    for j in 0..d {
        let mut observed: Vec<f64> = (0..n).filter_map(|i| ds.get(i, j)).collect();
        let stat = match ds.kinds()[j] {
            FeatureKind::Numeric => observed.iter().sum::<f64>() / observed.len() as f64,
            FeatureKind::Categorical(_) => mode(&mut observed),
        };
        fill.push(stat);
    }
    let mut m = DenseMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            m.set(i, j, ds.get(i, j).unwrap_or(fill[j]));
        }
    }
    m
}

/// Rescales each column to `[0, 1]` in place; constant columns become 0.
pub fn min_max_scale(m: &mut DenseMatrix) {
    let (n, d) = (m.n_rows(), m.n_cols());
    for j in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let v = m.get(i, j);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let range = hi - lo;
        for i in 0..n {
            let v = if range == 0.0 {
                0.0
            } else {
                (m.get(i, j) - lo) / range
            };
            m.set(i, j, v);
        }
    }
}

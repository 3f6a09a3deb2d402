//! Density-adaptive binning.
//!
//! Bin centers for each feature sit on equal-frequency percentiles of that
//! feature's observed values, so centers crowd together where the data is
//! dense and spread apart where it is sparse. Observed cells are then mapped
//! to their nearest center, which partitions each feature's axis into
//! Voronoi cells around the centers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::math;

/// Marker for unassigned (missing) cells in [`BinAssignment`].
const UNASSIGNED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BinError {
    #[error("n_bins must be at least 2, got {0}")]
    TooFewBins(usize),
    #[error("model covers {model} features but the dataset has {data}")]
    FeatureCountMismatch { model: usize, data: usize },
    #[error("invalid bin model: {0}")]
    InvalidModel(String),
    #[error("invalid bin assignment: {0}")]
    InvalidAssignment(String),
}

/// Per-feature bin centers fitted on observed values.
#[derive(Debug, Clone, PartialEq)]
pub struct BinModel {
    n_bins: usize,
    /// `centers[j][k]` is the k-th center for feature `j`, nondecreasing in `k`.
    centers: Vec<Vec<f64>>,
}

impl BinModel {
    /// Reassembles a model from its parts (e.g. when loading from a file),
    /// re-validating the invariants `fit_bin_centers` guarantees.
    pub fn from_parts(n_bins: usize, centers: Vec<Vec<f64>>) -> Result<Self, BinError> {
        if n_bins < 2 {
            return Err(BinError::TooFewBins(n_bins));
        }
        if centers.is_empty() {
            return Err(BinError::InvalidModel("no features".into()));
        }
        for (j, row) in centers.iter().enumerate() {
            if row.len() != n_bins {
                return Err(BinError::InvalidModel(format!(
                    "feature {j} has {} centers, expected {n_bins}",
                    row.len()
                )));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(BinError::InvalidModel(format!(
                    "feature {j} has a non-finite center"
                )));
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(BinError::InvalidModel(format!(
                    "feature {j} centers are not sorted"
                )));
            }
        }
        Ok(Self { n_bins, centers })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn feature_count(&self) -> usize {
        self.centers.len()
    }

    /// Centers for feature `j`, sorted ascending.
    pub fn centers(&self, j: usize) -> &[f64] {
        &self.centers[j]
    }
}

/// Value of the `q`-th percentile (0..=100) of an ascending-sorted,
/// non-empty slice, with linear interpolation between order statistics.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty slice");
    assert!(
        (0.0..=100.0).contains(&q),
        "percentile rank out of range: {q}"
    );
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * q / 100.0;
    let lo = math::floor(h) as usize;
    let hi = (lo + 1).min(m - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Fits `n_bins` equal-frequency bin centers per feature: center `k` sits at
/// the `k * 100 / (n_bins - 1)` percentile of the feature's observed values,
/// so the first and last centers coincide with the observed minimum and
/// maximum. Requires `n_bins >= 2`.
pub fn fit_bin_centers(ds: &Dataset, n_bins: usize) -> Result<BinModel, BinError> {
    if n_bins < 2 {
        return Err(BinError::TooFewBins(n_bins));
    }
    let mut centers = Vec::with_capacity(ds.d());
    for j in 0..ds.d() {
        let mut observed: Vec<f64> = (0..ds.n()).filter_map(|i| ds.get(i, j)).collect();
        observed.sort_unstable_by(f64::total_cmp);
        let row: Vec<f64> = (0..n_bins)
            .map(|k| percentile_sorted(&observed, k as f64 * 100.0 / (n_bins - 1) as f64))
            .collect();
        centers.push(row);
    }
    Ok(BinModel { n_bins, centers })
}

/// Index of the center nearest to `value`; ties go to the smaller index.
/// `value` must be finite and `centers` non-empty.
pub fn assign_bin(value: f64, centers: &[f64]) -> usize {
    assert!(
        value.is_finite(),
        "cannot assign a non-finite value to a bin"
    );
    assert!(!centers.is_empty(), "no centers to assign to");
    let mut best = 0;
    let mut best_dist = math::abs(value - centers[0]);
    for (k, &c) in centers.iter().enumerate().skip(1) {
        let dist = math::abs(value - c);
        if dist < best_dist {
            best = k;
            best_dist = dist;
        }
    }
    best
}

/// Bin index of every observed cell; missing cells stay unassigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinAssignment {
    n: usize,
    d: usize,
    n_bins: usize,
    /// Row-major bin indices, `UNASSIGNED` for missing cells.
    bins: Vec<u32>,
}

impl BinAssignment {
    /// Reassembles an assignment from per-cell `Option<u32>` bins,
    /// validating shape and bin ranges.
    pub fn from_parts(
        n: usize,
        d: usize,
        n_bins: usize,
        cells: Vec<Option<u32>>,
    ) -> Result<Self, BinError> {
        if n_bins < 2 {
            return Err(BinError::TooFewBins(n_bins));
        }
        if cells.len() != n * d || n == 0 || d == 0 {
            return Err(BinError::InvalidAssignment(format!(
                "{} cells do not form an {n}x{d} table",
                cells.len()
            )));
        }
        let mut bins = Vec::with_capacity(cells.len());
        for (idx, cell) in cells.into_iter().enumerate() {
            match cell {
                None => bins.push(UNASSIGNED),
                Some(b) if (b as usize) < n_bins => bins.push(b),
                Some(b) => {
                    return Err(BinError::InvalidAssignment(format!(
                        "bin {b} out of range at cell {idx} (n_bins = {n_bins})"
                    )))
                }
            }
        }
        Ok(Self { n, d, n_bins, bins })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Bin of cell `(i, j)`, or `None` when the cell was missing.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        let b = self.bins[i * self.d + j];
        if b == UNASSIGNED {
            None
        } else {
            Some(b as usize)
        }
    }

    /// Raw row `i` of bin codes with `u32::MAX` marking missing cells.
    #[inline]
    pub(crate) fn raw_row(&self, i: usize) -> &[u32] {
        &self.bins[i * self.d..(i + 1) * self.d]
    }

    pub(crate) const RAW_UNASSIGNED: u32 = UNASSIGNED;
}

/// Assigns every observed cell of `ds` to its nearest bin center.
pub fn assign_all(ds: &Dataset, model: &BinModel) -> Result<BinAssignment, BinError> {
    if model.feature_count() != ds.d() {
        return Err(BinError::FeatureCountMismatch {
            model: model.feature_count(),
            data: ds.d(),
        });
    }
    let (n, d) = (ds.n(), ds.d());
    let mut bins = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            match ds.get(i, j) {
                None => bins.push(UNASSIGNED),
                Some(v) => bins.push(assign_bin(v, model.centers(j)) as u32),
            }
        }
    }
    Ok(BinAssignment {
        n,
        d,
        n_bins: model.n_bins(),
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn numeric(d: usize, values: Vec<f64>) -> Dataset {
        let len = values.len();
        Dataset::from_numeric(d, values, vec![false; len]).unwrap()
    }

    #[test]
    fn percentile_interpolates_linearly() {
        let xs = [0.0, 10.0, 20.0, 30.0, 40.0];
        assert_eq!(percentile_sorted(&xs, 0.0), 0.0);
        assert_eq!(percentile_sorted(&xs, 50.0), 20.0);
        assert_eq!(percentile_sorted(&xs, 100.0), 40.0);
        assert_eq!(percentile_sorted(&xs, 25.0), 10.0);
        assert_eq!(percentile_sorted(&xs, 12.5), 5.0);
        let skewed = [1.0, 2.0, 3.0, 100.0];
        assert_eq!(percentile_sorted(&skewed, 50.0), 2.5);
        assert_eq!(percentile_sorted(&[7.0], 50.0), 7.0);
    }

    #[test]
    fn fit_places_centers_on_equal_frequency_percentiles() {
        let ds = numeric(1, vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        let model = fit_bin_centers(&ds, 3).unwrap();
        assert_eq!(model.centers(0), &[0.0, 20.0, 40.0]);

        let skewed = numeric(1, vec![1.0, 2.0, 3.0, 100.0]);
        let model = fit_bin_centers(&skewed, 3).unwrap();
        assert_eq!(model.centers(0), &[1.0, 2.5, 100.0]);
    }

    #[test]
    fn fit_adapts_to_density() {
        // Five points packed into [0, 0.4] and two stragglers: three of the
        // four centers land inside the dense region.
        let ds = numeric(1, vec![0.0, 0.1, 0.2, 0.3, 0.4, 50.0, 100.0]);
        let model = fit_bin_centers(&ds, 4).unwrap();
        assert_eq!(model.centers(0), &[0.0, 0.2, 0.4, 100.0]);
    }

    #[test]
    fn fit_handles_constant_and_singleton_features() {
        let ds = numeric(1, vec![5.0, 5.0, 5.0]);
        let model = fit_bin_centers(&ds, 3).unwrap();
        assert_eq!(model.centers(0), &[5.0, 5.0, 5.0]);

        // One observed value: every center collapses onto it.
        let ds = Dataset::from_numeric(
            2,
            vec![1.0, 9.0, 2.0, f64::NAN],
            vec![false, false, false, true],
        )
        .unwrap();
        let model = fit_bin_centers(&ds, 4).unwrap();
        assert_eq!(model.centers(1), &[9.0, 9.0, 9.0, 9.0]);
    }

    #[test]
    fn fit_endpoints_are_min_and_max() {
        let ds = numeric(1, vec![3.0, -7.0, 12.0, 0.5, 8.0, -2.0]);
        for n_bins in 2..=6 {
            let model = fit_bin_centers(&ds, n_bins).unwrap();
            let c = model.centers(0);
            assert_eq!(c[0], -7.0);
            assert_eq!(c[n_bins - 1], 12.0);
            assert!(c.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn fit_ignores_missing_cells() {
        let ds = Dataset::from_numeric(
            1,
            vec![0.0, 999.0, 10.0, 20.0],
            vec![false, true, false, false],
        )
        .unwrap();
        let model = fit_bin_centers(&ds, 3).unwrap();
        assert_eq!(model.centers(0), &[0.0, 10.0, 20.0]);
    }

    #[test]
    fn fit_is_deterministic() {
        let ds = numeric(2, vec![4.0, 1.0, 2.0, 2.0, 9.0, 3.0, 0.0, 4.0]);
        let a = fit_bin_centers(&ds, 3).unwrap();
        let b = fit_bin_centers(&ds, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_rejects_too_few_bins() {
        let ds = numeric(1, vec![1.0, 2.0]);
        assert_eq!(
            fit_bin_centers(&ds, 1).unwrap_err(),
            BinError::TooFewBins(1)
        );
        assert_eq!(
            fit_bin_centers(&ds, 0).unwrap_err(),
            BinError::TooFewBins(0)
        );
    }

    #[test]
    fn assign_picks_nearest_center() {
        assert_eq!(assign_bin(2.4, &[1.0, 3.0, 5.0]), 1);
        assert_eq!(assign_bin(4.1, &[1.0, 3.0, 5.0]), 2);
        assert_eq!(assign_bin(-100.0, &[0.0, 20.0, 40.0]), 0);
        assert_eq!(assign_bin(1e9, &[0.0, 20.0, 40.0]), 2);
    }

    #[test]
    fn assign_breaks_ties_toward_smaller_index() {
        assert_eq!(assign_bin(10.0, &[0.0, 20.0, 40.0]), 0);
        assert_eq!(assign_bin(5.0, &[5.0, 5.0, 5.0]), 0);
        assert_eq!(assign_bin(30.0, &[0.0, 20.0, 40.0]), 1);
    }

    #[test]
    #[should_panic]
    fn assign_rejects_nan() {
        let _ = assign_bin(f64::NAN, &[0.0, 1.0]);
    }

    #[test]
    fn assign_all_tracks_missing_cells() {
        let ds = Dataset::from_numeric(
            2,
            vec![0.0, 5.0, 10.0, f64::NAN, 20.0, 6.0],
            vec![false, false, false, true, false, false],
        )
        .unwrap();
        let model = fit_bin_centers(&ds, 3).unwrap();
        let assignment = assign_all(&ds, &model).unwrap();
        assert_eq!(assignment.n(), 3);
        assert_eq!(assignment.d(), 2);
        assert_eq!(assignment.n_bins(), 3);
        assert_eq!(assignment.get(0, 0), Some(0));
        assert_eq!(assignment.get(1, 0), Some(1));
        assert_eq!(assignment.get(2, 0), Some(2));
        assert_eq!(assignment.get(1, 1), None);
    }

    #[test]
    fn assign_all_rejects_feature_mismatch() {
        let ds = numeric(2, vec![1.0, 2.0, 3.0, 4.0]);
        let model = fit_bin_centers(&numeric(1, vec![1.0, 2.0]), 2).unwrap();
        assert_eq!(
            assign_all(&ds, &model).unwrap_err(),
            BinError::FeatureCountMismatch { model: 1, data: 2 }
        );
    }

    #[test]
    fn model_from_parts_validates() {
        assert!(BinModel::from_parts(2, vec![vec![0.0, 1.0]]).is_ok());
        assert!(matches!(
            BinModel::from_parts(1, vec![vec![0.0]]),
            Err(BinError::TooFewBins(1))
        ));
        assert!(matches!(
            BinModel::from_parts(2, vec![vec![0.0, 1.0, 2.0]]),
            Err(BinError::InvalidModel(_))
        ));
        assert!(matches!(
            BinModel::from_parts(2, vec![vec![1.0, 0.0]]),
            Err(BinError::InvalidModel(_))
        ));
        assert!(matches!(
            BinModel::from_parts(2, vec![vec![0.0, f64::NAN]]),
            Err(BinError::InvalidModel(_))
        ));
    }

    #[test]
    fn assignment_from_parts_validates() {
        let ok = BinAssignment::from_parts(2, 1, 2, vec![Some(0), None]).unwrap();
        assert_eq!(ok.get(0, 0), Some(0));
        assert_eq!(ok.get(1, 0), None);
        assert!(matches!(
            BinAssignment::from_parts(2, 1, 2, vec![Some(2), None]),
            Err(BinError::InvalidAssignment(_))
        ));
        assert!(matches!(
            BinAssignment::from_parts(2, 2, 2, vec![Some(0), None]),
            Err(BinError::InvalidAssignment(_))
        ));
    }

    #[test]
    fn roundtrips_through_parts() {
        let ds = numeric(2, vec![0.0, 5.0, 10.0, 6.0, 20.0, 7.0]);
        let model = fit_bin_centers(&ds, 2).unwrap();
        let rebuilt = BinModel::from_parts(
            model.n_bins(),
            (0..2).map(|j| model.centers(j).to_vec()).collect(),
        )
        .unwrap();
        assert_eq!(model, rebuilt);
    }
}

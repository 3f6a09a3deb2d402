//! In-memory tabular dataset with an explicit missingness mask.
//!
//! Cells are stored as `f64` regardless of feature kind: categorical
//! features hold integer codes into their [`CategoryMap`]. Missing cells are
//! normalized to `NaN` and tracked in a separate boolean mask, so a read of
//! a missing cell without consulting the mask is loud rather than silent.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::math;

/// Maximum number of re-draw rounds `inject_mcar` spends repairing
/// all-missing rows or columns before giving up.
const MCAR_RETRY_BUDGET: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("dataset must have at least one row and one feature")]
    Empty,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("features with no observed values: {0:?}")]
    DegenerateFeatures(Vec<String>),
    #[error("label vector has {got} entries, expected {expected}")]
    LabelLength { expected: usize, got: usize },
    #[error("non-finite value at row {row}, feature {feature}")]
    NonFiniteValue { row: usize, feature: usize },
    #[error("invalid category code at row {row}, feature {feature}: {value}")]
    InvalidCategoryCode {
        row: usize,
        feature: usize,
        value: f64,
    },
    #[error("missing rate must lie in [0, 1), got {0}")]
    InvalidRate(f64),
    #[error("mask injection requires a complete dataset")]
    AlreadyIncomplete,
    #[error("mask injection could not avoid all-missing rows/columns within {MCAR_RETRY_BUDGET} re-draws")]
    RetryBudgetExhausted,
}

/// Ordered set of category names for one categorical feature; the cell value
/// for category `k` is `k as f64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryMap {
    names: Vec<String>,
}

impl CategoryMap {
    pub fn new(names: Vec<String>) -> Self {
        Self { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Name of category `code`, if in range.
    pub fn name(&self, code: usize) -> Option<&str> {
        self.names.get(code).map(String::as_str)
    }

    /// Code of `name`, if present.
    pub fn code_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|c| c == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical(CategoryMap),
}

/// A table of `n` rows by `d` features with a missingness mask and optional
/// integer class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    d: usize,
    /// Row-major cell values; missing cells are `NaN`.
    values: Vec<f64>,
    /// Row-major mask; `true` marks a missing cell.
    missing: Vec<bool>,
    kinds: Vec<FeatureKind>,
    names: Vec<String>,
    labels: Option<Vec<u32>>,
}

impl Dataset {
    /// Builds a dataset and validates its invariants: consistent shapes,
    /// at least one observed value per feature, finite observed values, and
    /// in-range integer codes for categorical cells. Missing cells are
    /// normalized to `NaN`.
    pub fn new(
        values: Vec<f64>,
        missing: Vec<bool>,
        kinds: Vec<FeatureKind>,
        names: Vec<String>,
        labels: Option<Vec<u32>>,
    ) -> Result<Self, DataError> {
        let d = kinds.len();
        if d == 0 || values.is_empty() {
            return Err(DataError::Empty);
        }
        if names.len() != d {
            return Err(DataError::ShapeMismatch(format!(
                "{} feature names for {} features",
                names.len(),
                d
            )));
        }
        if values.len() % d != 0 {
            return Err(DataError::ShapeMismatch(format!(
                "{} values do not form rows of width {}",
                values.len(),
                d
            )));
        }
        let n = values.len() / d;
        if missing.len() != values.len() {
            return Err(DataError::ShapeMismatch(format!(
                "mask has {} entries, expected {}",
                missing.len(),
                values.len()
            )));
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(DataError::LabelLength {
                    expected: n,
                    got: l.len(),
                });
            }
        }

        let mut values = values;
        let mut observed_per_feature = vec![0usize; d];
        for i in 0..n {
            for j in 0..d {
                let idx = i * d + j;
                if missing[idx] {
                    values[idx] = f64::NAN;
                    continue;
                }
                observed_per_feature[j] += 1;
                let v = values[idx];
                if !v.is_finite() {
                    return Err(DataError::NonFiniteValue { row: i, feature: j });
                }
                if let FeatureKind::Categorical(ref map) = kinds[j] {
                    if v != math::floor(v) || v < 0.0 || v >= map.len() as f64 {
                        return Err(DataError::InvalidCategoryCode {
                            row: i,
                            feature: j,
                            value: v,
                        });
                    }
                }
            }
        }
        let degenerate: Vec<String> = (0..d)
            .filter(|&j| observed_per_feature[j] == 0)
            .map(|j| names[j].clone())
            .collect();
        if !degenerate.is_empty() {
            return Err(DataError::DegenerateFeatures(degenerate));
        }

        Ok(Self {
            n,
            d,
            values,
            missing,
            kinds,
            names,
            labels,
        })
    }

    /// Convenience constructor for an all-numeric table with features named
    /// `f0..f{d-1}` and no labels.
    pub fn from_numeric(d: usize, values: Vec<f64>, missing: Vec<bool>) -> Result<Self, DataError> {
        let kinds = vec![FeatureKind::Numeric; d.max(1)];
        let names = (0..d.max(1)).map(|j| format!("f{j}")).collect();
        Self::new(values, missing, kinds, names, None)
    }

    /// Attaches class labels (one per row).
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self, DataError> {
        if labels.len() != self.n {
            return Err(DataError::LabelLength {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Raw cell value; `NaN` when the cell is missing.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    /// Cell value, or `None` when missing.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if self.is_missing(i, j) {
            None
        } else {
            Some(self.values[i * self.d + j])
        }
    }

    #[inline]
    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.missing[i * self.d + j]
    }

    /// Row-major missingness mask.
    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    /// Number of missing cells.
    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Number of observed values for feature `j`.
    pub fn observed_count(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| !self.is_missing(i, j)).count()
    }

    /// Returns a copy with extra cells masked out, each cell independently
    /// with probability `rate` (missing completely at random).
    ///
    /// The input must be complete and `rate` must lie in `[0, 1)`. Draws are
    /// seeded and row-major, so the mask is reproducible. Rows or columns
    /// that come out entirely missing are re-drawn for a bounded number of
    /// rounds; if the budget is exhausted the call fails rather than return
    /// a degenerate dataset.
    pub fn inject_mcar(&self, rate: f64, seed: u64) -> Result<Dataset, DataError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(DataError::InvalidRate(rate));
        }
        if self.missing_count() != 0 {
            return Err(DataError::AlreadyIncomplete);
        }

        let (n, d) = (self.n, self.d);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut mask = vec![false; n * d];
        if rate > 0.0 {
            for cell in mask.iter_mut() {
                *cell = rng.random::<f64>() < rate;
            }
            let mut attempts = 0;
            loop {
                let bad_rows: Vec<usize> = (0..n)
                    .filter(|&i| (0..d).all(|j| mask[i * d + j]))
                    .collect();
                let bad_cols: Vec<usize> = (0..d)
                    .filter(|&j| (0..n).all(|i| mask[i * d + j]))
                    .collect();
                if bad_rows.is_empty() && bad_cols.is_empty() {
                    break;
                }
                attempts += 1;
                if attempts > MCAR_RETRY_BUDGET {
                    return Err(DataError::RetryBudgetExhausted);
                }
                for &i in &bad_rows {
                    for j in 0..d {
                        mask[i * d + j] = rng.random::<f64>() < rate;
                    }
                }
                for &j in &bad_cols {
                    for i in 0..n {
                        mask[i * d + j] = rng.random::<f64>() < rate;
                    }
                }
            }
        }

        Dataset::new(
            self.values.clone(),
            mask,
            self.kinds.clone(),
            self.names.clone(),
            self.labels.clone(),
        )
    }
}

//! Sparse one-hot representation with cascading fallback for missing cells.
//!
//! Each observed cell becomes a one-hot block of width `n_bins`. A missing
//! cell `(i, j)` is filled with an estimated bin distribution, tried in
//! order:
//!
//! 1. **Intersection**: average the one-hot blocks of feature `j` over rows
//!    that agree with row `i` on *every* feature `i` observes.
//! 2. **Union**: the same average over rows that agree on *at least one*
//!    observed feature.
//! 3. **Prior**: the dataset-wide bin distribution of feature `j`.
//!
//! A level is skipped when its row set is empty or none of its rows observe
//! feature `j`; rows with no observed features at all go straight to the
//! prior. Every block — observed or estimated — sums to one.
//!
//! [`match_set`], [`intersection_match`], [`union_match`] and
//! [`kme_estimate`] expose the per-row definitions directly; they are the
//! reference path and cost `O(n·d)` per call. [`apply_fallback`] is the
//! batch path: it groups rows by their full bin pattern and answers the
//! set queries per *group* through an inverted (feature, bin) index, which
//! is exact because rows with identical patterns receive identical
//! estimates and a row never observes a feature it is being estimated for.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::binning::{assign_all, BinAssignment, BinError, BinModel};
use crate::dataset::Dataset;
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error(transparent)]
    Binning(#[from] BinError),
    #[error("cell (row {row}, feature {feature}) is not missing")]
    NotMissing { row: usize, feature: usize },
    #[error("cell (row {row}, feature {feature}) is missing")]
    MissingCell { row: usize, feature: usize },
    #[error("row {row} has no observed features")]
    RowFullyMissing { row: usize },
    #[error("feature {feature} has no observed values")]
    FeatureNeverObserved { feature: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("inconsistent state: {0}")]
    InconsistentState(String),
    #[error("invalid representation: {0}")]
    InvalidParts(String),
}

/// How a representation block was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FallbackLevel {
    /// The cell was observed; the block is an exact one-hot vector.
    Observed,
    /// The cell is missing and has not been estimated yet (all-zero block).
    Pending,
    /// Estimated from rows matching on every observed feature.
    Intersection,
    /// Estimated from rows matching on at least one observed feature.
    Union,
    /// Filled with the feature's global bin distribution.
    Prior,
}

/// Tally of block fallback levels over a whole representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LevelCounts {
    pub observed: usize,
    pub pending: usize,
    pub intersection: usize,
    pub union_match: usize,
    pub prior: usize,
}

/// Sparse block representation: `n` rows of `d` blocks, each block a
/// distribution of width `n_bins` summing to one (except `Pending` blocks,
/// which are all-zero placeholders).
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    n: usize,
    d: usize,
    n_bins: usize,
    /// Row-major, block-contiguous values; row width is `d * n_bins`.
    z: Vec<f64>,
    /// Row-major fallback level per (row, feature) block.
    levels: Vec<FallbackLevel>,
}

impl Representation {
    /// Reassembles a representation (e.g. when loading from a file),
    /// re-validating value ranges and block sums.
    pub fn from_parts(
        n: usize,
        d: usize,
        n_bins: usize,
        z: Vec<f64>,
        levels: Vec<FallbackLevel>,
    ) -> Result<Self, EncodeError> {
        if n == 0 || d == 0 || n_bins < 2 {
            return Err(EncodeError::InvalidParts(format!(
                "degenerate shape {n}x{d} with {n_bins} bins"
            )));
        }
        if z.len() != n * d * n_bins {
            return Err(EncodeError::InvalidParts(format!(
                "{} values do not fill {n} rows of {d} blocks of {n_bins}",
                z.len()
            )));
        }
        if levels.len() != n * d {
            return Err(EncodeError::InvalidParts(format!(
                "{} levels for {} blocks",
                levels.len(),
                n * d
            )));
        }
        for (idx, &v) in z.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(EncodeError::InvalidParts(format!(
                    "value {v} at position {idx} is outside [0, 1]"
                )));
            }
        }
        for i in 0..n {
            for j in 0..d {
                let sum: f64 = z[(i * d + j) * n_bins..(i * d + j + 1) * n_bins]
                    .iter()
                    .sum();
                let expected = if levels[i * d + j] == FallbackLevel::Pending {
                    0.0
                } else {
                    1.0
                };
                if crate::math::abs(sum - expected) > 1e-9 {
                    return Err(EncodeError::InvalidParts(format!(
                        "block (row {i}, feature {j}) sums to {sum}, expected {expected}"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            d,
            n_bins,
            z,
            levels,
        })
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

    /// Width of one row: `d * n_bins`.
    pub fn width(&self) -> usize {
        self.d * self.n_bins
    }

    /// Full row `i` of concatenated blocks.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.z[i * w..(i + 1) * w]
    }

    /// Block for feature `j` of row `i`.
    #[inline]
    pub fn block(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.d + j) * self.n_bins;
        &self.z[start..start + self.n_bins]
    }

    #[inline]
    fn block_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let start = (i * self.d + j) * self.n_bins;
        &mut self.z[start..start + self.n_bins]
    }

    /// Fallback level of block `(i, j)`.
    #[inline]
    pub fn level(&self, i: usize, j: usize) -> FallbackLevel {
        self.levels[i * self.d + j]
    }

    /// Fallback level of every block in row `i`.
    pub fn levels_row(&self, i: usize) -> &[FallbackLevel] {
        &self.levels[i * self.d..(i + 1) * self.d]
    }

    /// Tally of block fallback levels across all rows.
    pub fn level_counts(&self) -> LevelCounts {
        let mut c = LevelCounts::default();
        for &l in &self.levels {
            match l {
                FallbackLevel::Observed => c.observed += 1,
                FallbackLevel::Pending => c.pending += 1,
                FallbackLevel::Intersection => c.intersection += 1,
                FallbackLevel::Union => c.union_match += 1,
                FallbackLevel::Prior => c.prior += 1,
            }
        }
        c
    }

    /// The flat row-major value buffer.
    pub fn values(&self) -> &[f64] {
        &self.z
    }

    /// Number of non-zero entries.
    pub fn nnz(&self) -> usize {
        self.z.iter().filter(|&&v| v != 0.0).count()
    }

    /// Copies the representation into a dense `n x (d * n_bins)` matrix.
    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::new(self.n, self.width(), self.z.clone())
    }
}

/// One-hot encodes every observed cell; missing cells become all-zero
/// `Pending` blocks awaiting [`apply_fallback`].
pub fn encode_observed(assignment: &BinAssignment) -> Representation {
    let (n, d, n_bins) = (assignment.n(), assignment.d(), assignment.n_bins());
    let mut z = vec![0.0; n * d * n_bins];
    let mut levels = vec![FallbackLevel::Pending; n * d];
    for i in 0..n {
        for j in 0..d {
            if let Some(b) = assignment.get(i, j) {
                z[(i * d + j) * n_bins + b] = 1.0;
                levels[i * d + j] = FallbackLevel::Observed;
            }
        }
    }
    Representation {
        n,
        d,
        n_bins,
        z,
        levels,
    }
}

/// Rows (other than `i`) that observe feature `j` in the same bin as row
/// `i`. Requires cell `(i, j)` to be observed.
pub fn match_set(
    i: usize,
    j: usize,
    assignment: &BinAssignment,
) -> Result<Vec<usize>, EncodeError> {
    let b = assignment
        .get(i, j)
        .ok_or(EncodeError::MissingCell { row: i, feature: j })?;
    Ok((0..assignment.n())
        .filter(|&m| m != i && assignment.get(m, j) == Some(b))
        .collect())
}

/// Rows matching row `i` on *every* feature it observes (first fallback
/// level). Fails if row `i` observes nothing.
pub fn intersection_match(i: usize, assignment: &BinAssignment) -> Result<Vec<usize>, EncodeError> {
    let observed: Vec<usize> = (0..assignment.d())
        .filter(|&j| assignment.get(i, j).is_some())
        .collect();
    if observed.is_empty() {
        return Err(EncodeError::RowFullyMissing { row: i });
    }
    Ok((0..assignment.n())
        .filter(|&m| {
            m != i
                && observed
                    .iter()
                    .all(|&j| assignment.get(m, j) == assignment.get(i, j))
        })
        .collect())
}

/// Rows matching row `i` on *at least one* feature it observes (second
/// fallback level). Fails if row `i` observes nothing.
pub fn union_match(i: usize, assignment: &BinAssignment) -> Result<Vec<usize>, EncodeError> {
    let observed: Vec<usize> = (0..assignment.d())
        .filter(|&j| assignment.get(i, j).is_some())
        .collect();
    if observed.is_empty() {
        return Err(EncodeError::RowFullyMissing { row: i });
    }
    Ok((0..assignment.n())
        .filter(|&m| {
            m != i
                && observed.iter().any(|&j| {
                    assignment.get(m, j).is_some() && assignment.get(m, j) == assignment.get(i, j)
                })
        })
        .collect())
}

/// Mean one-hot block of feature `j` over the `members` rows that observe
/// it: entry `k` is the fraction of observing members in bin `k`. `None`
/// when no member observes `j` (an empty signal, which cascades to the next
/// fallback level).
pub fn kme_estimate(members: &[usize], j: usize, assignment: &BinAssignment) -> Option<Vec<f64>> {
    let mut counts = vec![0u64; assignment.n_bins()];
    let mut total = 0u64;
    for &m in members {
        if let Some(b) = assignment.get(m, j) {
            counts[b] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return None;
    }
    Some(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Per-feature global bin distributions (the third fallback level).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPriors {
    d: usize,
    n_bins: usize,
    /// `p[j * n_bins + k]` is the share of feature `j`'s observed values in bin `k`.
    p: Vec<f64>,
}

impl GlobalPriors {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Bin distribution of feature `j`.
    pub fn distribution(&self, j: usize) -> &[f64] {
        &self.p[j * self.n_bins..(j + 1) * self.n_bins]
    }
}

/// Computes each feature's observed bin distribution. Fails if some feature
/// is observed nowhere (impossible for assignments derived from a
/// [`Dataset`], which forbids such features).
pub fn global_prior(assignment: &BinAssignment) -> Result<GlobalPriors, EncodeError> {
    let (n, d, n_bins) = (assignment.n(), assignment.d(), assignment.n_bins());
    let mut p = vec![0.0; d * n_bins];
    for j in 0..d {
        let mut counts = vec![0u64; n_bins];
        let mut total = 0u64;
        for i in 0..n {
            if let Some(b) = assignment.get(i, j) {
                counts[b] += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(EncodeError::FeatureNeverObserved { feature: j });
        }
        for k in 0..n_bins {
            p[j * n_bins + k] = counts[k] as f64 / total as f64;
        }
    }
    Ok(GlobalPriors { d, n_bins, p })
}

/// One group of rows sharing an identical bin pattern (including which
/// cells are missing).
struct Group {
    rows: Vec<u32>,
    pattern: Vec<u32>,
    observed: Vec<usize>,
    missing: Vec<usize>,
}

/// Fills every `Pending` block of `rep` with its cascading-fallback
/// estimate, recording the level used.
///
/// Produces exactly the per-row semantics of [`intersection_match`],
/// [`union_match`] and [`kme_estimate`] (including bit-identical block
/// values), but batched: rows are grouped by their full bin pattern, set
/// queries run once per group against a (feature, bin) inverted index over
/// groups, and estimates average group blocks weighted by group size.
pub fn apply_fallback(
    rep: &mut Representation,
    assignment: &BinAssignment,
    priors: &GlobalPriors,
) -> Result<(), EncodeError> {
    let (n, d, n_bins) = (assignment.n(), assignment.d(), assignment.n_bins());
    if rep.n() != n || rep.d() != d || rep.n_bins() != n_bins {
        return Err(EncodeError::ShapeMismatch(format!(
            "representation is {}x{} with {} bins, assignment is {n}x{d} with {n_bins}",
            rep.n(),
            rep.d(),
            rep.n_bins()
        )));
    }
    if priors.d() != d || priors.n_bins() != n_bins {
        return Err(EncodeError::ShapeMismatch(format!(
            "priors cover {} features with {} bins, assignment has {d} features with {n_bins}",
            priors.d(),
            priors.n_bins()
        )));
    }
    let mut pending = 0usize;
    for i in 0..n {
        for j in 0..d {
            let is_missing = assignment.get(i, j).is_none();
            let is_pending = rep.level(i, j) == FallbackLevel::Pending;
            if is_missing != is_pending {
                return Err(EncodeError::InconsistentState(format!(
                    "block (row {i}, feature {j}) is {:?} but the cell is {}",
                    rep.level(i, j),
                    if is_missing { "missing" } else { "observed" }
                )));
            }
            pending += is_pending as usize;
        }
    }
    if pending == 0 {
        return Ok(());
    }

    // Group rows by bin pattern (sorted, so grouping is deterministic).
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&x, &y| {
        assignment
            .raw_row(x as usize)
            .cmp(assignment.raw_row(y as usize))
            .then(x.cmp(&y))
    });
    let mut groups: Vec<Group> = Vec::new();
    let mut start = 0;
    while start < n {
        let head = assignment.raw_row(order[start] as usize);
        let mut end = start + 1;
        while end < n && assignment.raw_row(order[end] as usize) == head {
            end += 1;
        }
        let pattern = head.to_vec();
        let observed: Vec<usize> = (0..d)
            .filter(|&j| pattern[j] != BinAssignment::RAW_UNASSIGNED)
            .collect();
        let missing: Vec<usize> = (0..d)
            .filter(|&j| pattern[j] == BinAssignment::RAW_UNASSIGNED)
            .collect();
        groups.push(Group {
            rows: order[start..end].to_vec(),
            pattern,
            observed,
            missing,
        });
        start = end;
    }
    let sizes: Vec<u64> = groups.iter().map(|g| g.rows.len() as u64).collect();

    // Inverted index: (feature, bin) -> groups observing that bin.
    let mut index: Vec<Vec<u32>> = vec![Vec::new(); d * n_bins];
    for (gid, g) in groups.iter().enumerate() {
        for &j in &g.observed {
            index[j * n_bins + g.pattern[j] as usize].push(gid as u32);
        }
    }

    // Mean block of feature `j` over the listed groups, weighted by group
    // size; counts are integers, so this equals the row-level average
    // exactly.
    let kme_over = |list: &[u32], j: usize| -> Option<Vec<f64>> {
        let mut counts = vec![0u64; n_bins];
        let mut total = 0u64;
        for &h in list {
            let b = groups[h as usize].pattern[j];
            if b != BinAssignment::RAW_UNASSIGNED {
                counts[b as usize] += sizes[h as usize];
                total += sizes[h as usize];
            }
        }
        if total == 0 {
            return None;
        }
        Some(counts.iter().map(|&c| c as f64 / total as f64).collect())
    };

    let mut s1: Vec<u32> = Vec::new();
    let mut s2: Vec<u32> = Vec::new();
    let mut stamp: Vec<usize> = vec![0; groups.len()];
    let mut epoch = 0usize;

    for gid in 0..groups.len() {
        let g = &groups[gid];
        if g.missing.is_empty() {
            continue;
        }
        let mut results: Vec<(usize, Vec<f64>, FallbackLevel)> =
            Vec::with_capacity(g.missing.len());
        if g.observed.is_empty() {
            for &j in &g.missing {
                results.push((j, priors.distribution(j).to_vec(), FallbackLevel::Prior));
            }
        } else {
            // Intersection candidates: scan the shortest per-feature list
            // and keep groups matching every observed feature. Candidate
            // totals include the group itself, so "peers" subtracts one row.
            let j0 = *g
                .observed
                .iter()
                .min_by_key(|&&j| index[j * n_bins + g.pattern[j] as usize].len())
                .unwrap();
            s1.clear();
            for &h in &index[j0 * n_bins + g.pattern[j0] as usize] {
                let hp = &groups[h as usize].pattern;
                if g.observed.iter().all(|&j| hp[j] == g.pattern[j]) {
                    s1.push(h);
                }
            }
            let s1_peers: u64 = s1.iter().map(|&h| sizes[h as usize]).sum::<u64>() - 1;

            let mut s2_built = false;
            let mut s2_peers = 0u64;
            for &j in &g.missing {
                if s1_peers > 0 {
                    if let Some(dist) = kme_over(&s1, j) {
                        results.push((j, dist, FallbackLevel::Intersection));
                        continue;
                    }
                }
                if !s2_built {
                    s2_built = true;
                    epoch += 1;
                    s2.clear();
                    let mut s2_total = 0u64;
                    for &jo in &g.observed {
                        for &h in &index[jo * n_bins + g.pattern[jo] as usize] {
                            if stamp[h as usize] != epoch {
                                stamp[h as usize] = epoch;
                                s2.push(h);
                                s2_total += sizes[h as usize];
                            }
                        }
                    }
                    s2_peers = s2_total - 1;
                }
                if s2_peers > 0 {
                    if let Some(dist) = kme_over(&s2, j) {
                        results.push((j, dist, FallbackLevel::Union));
                        continue;
                    }
                }
                results.push((j, priors.distribution(j).to_vec(), FallbackLevel::Prior));
            }
        }
        for &row in &groups[gid].rows {
            for (j, dist, lvl) in &results {
                rep.block_mut(row as usize, *j).copy_from_slice(dist);
                rep.levels[row as usize * d + j] = *lvl;
            }
        }
    }
    Ok(())
}

/// Full encoding pipeline: assign bins, one-hot observed cells, fill
/// missing cells by cascading fallback.
pub fn encode_dataset(ds: &Dataset, model: &BinModel) -> Result<Representation, EncodeError> {
    let assignment = assign_all(ds, model)?;
    let mut rep = encode_observed(&assignment);
    let priors = global_prior(&assignment)?;
    apply_fallback(&mut rep, &assignment, &priors)?;
    Ok(rep)
}

//! Density-adaptive proximity representations for incomplete tabular data.
//!
//! The pipeline turns a table with missing cells into a sparse vector
//! representation whose inner products form a positive semi-definite
//! similarity matrix:
//!
//! 1. [`fit_bin_centers`] places per-feature bin centers on equal-frequency
//!    percentiles of the observed values, so bins are narrow where data is
//!    dense and wide where it is sparse.
//! 2. [`assign_all`] maps every observed cell to its nearest center.
//! 3. [`encode_observed`] emits one one-hot block per feature; missing
//!    features are filled in by [`apply_fallback`], which averages the
//!    one-hot blocks of progressively looser neighbourhoods (rows matching
//!    on *all* observed features, then on *any*, then a global per-feature
//!    bin distribution).
//! 4. [`gram`] builds the normalized inner-product matrix
//!    `K[m][n] = <z_m, z_n> / d`.
//!
//! Every block of the representation sums to one, so kernel values stay in
//! `[0, 1]` and the Gram matrix is positive semi-definite by construction.
//!
//! The crate also carries the small evaluation toolkit used by the `pk`
//! command-line tool: Lloyd k-means with distance-weighted seeding
//! ([`kmeans`]), normalized mutual information ([`nmi`]), mean/mode
//! imputation ([`mean_impute`]) as a baseline, and a seeded
//! missing-completely-at-random mask injector
//! ([`Dataset::inject_mcar`]).
//!
//! The crate is `no_std` (it allocates, but performs no IO); file formats
//! and the CLI live in the companion `pk-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod binning;
pub mod cluster;
pub mod dataset;
pub mod encoder;
pub mod impute;
pub mod kernel;
pub mod matrix;
pub mod metrics;

mod math;

pub use binning::{assign_all, assign_bin, fit_bin_centers, BinAssignment, BinError, BinModel};
pub use cluster::{kmeans, ClusterError, ClusteringResult, KMeansConfig};
pub use dataset::{CategoryMap, DataError, Dataset, FeatureKind};
pub use encoder::{
    apply_fallback, encode_dataset, encode_observed, global_prior, intersection_match,
    kme_estimate, match_set, union_match, EncodeError, FallbackLevel, GlobalPriors, LevelCounts,
    Representation,
};
pub use impute::{mean_impute, min_max_scale};
pub use kernel::{gram, kernel_value, min_eigenvalue, GramMatrix, KernelError};
pub use matrix::DenseMatrix;
pub use metrics::{nmi, MetricError};

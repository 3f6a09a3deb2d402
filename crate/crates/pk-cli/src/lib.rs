//! IO, file formats, and the evaluation harness behind the `pk` binary.
//!
//! The algorithmic core lives in `pk-core`; this crate adds everything that
//! touches the outside world: CSV dataset loading with missing-value
//! markers and ordinal encoding of text columns, JSON/CSV artifacts for bin
//! models, representations, kernel matrices and experiment reports, the
//! synthetic dataset generators, and the experiment drivers (clustering
//! runs, missing-rate and bin-count sweeps, scaling benchmarks).

pub mod error;
pub mod formats;
pub mod harness;
pub mod io;
pub mod synth;

pub use error::CliError;

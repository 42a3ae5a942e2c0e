//! Multi-copy discrimination of quantum states.
//!
//! Given an ensemble `{p_i, ρ_i}` and a number of copies `k`, the optimal
//! success probability of identifying `i` from `ρ_i^{⊗k}` is a semidefinite
//! program. This crate computes it (directly, through the Gram matrix of pure
//! states, or via the pretty-good measurement for covariant ensembles),
//! evaluates closed-form bounds, handles classical ensembles exactly,
//! builds and verifies designs, searches for optimal ensembles, and solves
//! the outer relaxation that upper bounds the best ensemble.

pub mod bounds;
pub mod classical;
pub mod designs;
pub mod discrim;
pub mod dps;
pub mod qcore;
pub mod search;

pub use kcopy_sdp as sdp;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("a {rows}x{cols} matrix exceeds the size cap of {cap} entries")]
    SizeCap { rows: usize, cols: usize, cap: usize },
    #[error("not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("solver finished with status {0}")]
    Solver(sdp::SdpStatus),
    #[error(transparent)]
    Sdp(#[from] sdp::Error),
    #[error("objective became non-finite")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;

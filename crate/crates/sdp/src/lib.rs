//! Dense block semidefinite programming.
//!
//! [`SdpProblem`] holds real symmetric block data in sparse triplet form,
//! [`solve`] runs a primal-dual interior-point method on it, and
//! [`hermitian`] maps complex Hermitian problems onto real ones.

pub mod certify;
pub mod hermitian;
pub mod problem;
pub mod solver;

pub use certify::{rigorous_upper_from_dual, CertifiedBound};
pub use hermitian::{embed, unembed, Field, HermitianSdp, Lmi};
pub use problem::{entries_from_dense, Constraint, Entry, SdpProblem, Sense};
pub use solver::{solve, SdpOptions, SdpSolution, SdpStatus};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("solver produced non-finite values")]
    NonFinite,
    #[error("dual residual {0:e} too large to certify")]
    ResidualTooLarge(f64),
    #[error("certification needs {0}")]
    MissingData(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

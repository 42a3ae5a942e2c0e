//! Dense complex linear algebra and quantum primitives: tensor powers,
//! permutation operators, the symmetric subspace, partial trace and
//! transpose, states, ensembles and measurements.

pub mod linalg;
pub mod states;
pub mod sym;

pub use linalg::*;
pub use states::*;
pub use sym::*;

//! Octonion phase retrieval.
//!
//! Recovers an octonion signal `x in O^n` from intensities `y = |Ax|^2` with
//! Octonion Wirtinger Flow (spectral initialization followed by gradient
//! descent on the real representation), up to a global right unit factor.
//!
//! * [`algebra`]: octonion arithmetic and the `aleph` / `gimel` representations.
//! * [`linalg`]: octonion vectors and matrices, Hermitian products, power method.
//! * [`solver`]: the OWF objective, gradient, initializer, update loop and the
//!   right-phase distance.
//! * [`baseline`]: real-valued gradient descent on the concatenated channels
//!   with a Lanczos initializer.
//! * [`harness`]: seeded data generation, noise, sweeps, metrics and CSV output.
//! * [`imaging`]: the 8-band image container and its `OCT8` file format.

pub mod algebra;
pub mod baseline;
pub mod error;
pub mod harness;
pub mod imaging;
pub mod linalg;
pub mod par;
pub mod solver;

pub use algebra::Octonion;
pub use error::{Error, Result};
pub use linalg::{OctMatrix, OctVector, RealMatrix};
pub use par::Exec;
pub use solver::{owf_solve, OwfConfig, SolveReport};

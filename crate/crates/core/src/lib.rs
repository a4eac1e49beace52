//! Numerical laboratory for quasi-periodic block Jacobi operators with
//! meromorphic diagonal potentials.
//!
//! * [`quasiperiodic`]: torus symbols, the block model, hypothesis checks.
//! * [`operator`]: finite-volume `H` and the regularized `H̃ = (H - E)·M/√(1+E²)`.
//! * [`greens`]: determinants, minors, Green's functions, minor upper and
//!   determinant lower bound sweeps.
//! * [`ergodic`]: Birkhoff averages of the log-determinant density and
//!   large-deviation set measurement.
//! * [`localization`]: eigenpairs, decay fits, transfer matrices, Green's
//!   function decay scans and resolvent patching.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ergodic;
pub mod exec;
pub mod greens;
pub mod linalg;
pub mod localization;
pub mod operator;
pub mod quasiperiodic;

pub use error::{Error, Result};
pub use operator::{BlockTridiagonal, OperatorParams, Window};
pub use quasiperiodic::{models, BlockModel, MeroScalar, TrigPoly};

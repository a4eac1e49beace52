//! Symbols on the torus: trigonometric polynomials, meromorphic diagonal
//! entries, the block model and its hypothesis checks.

pub mod config;
pub mod diophantine;
pub mod model;
pub mod models;
pub mod trig;

pub use config::{parse_model, ModelFile};
pub use diophantine::{is_diophantine, DiophantineCheck, DiophantineParams};
pub use model::{check_nondegeneracy, BlockModel, MeroMatrix, NondegeneracyWitness, RSign};
pub use trig::{locate_zeros, MeroScalar, TrigPoly};

/// `(√5 - 1)/2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub fn eval_trig(p: &TrigPoly, x: f64) -> f64 {
    p.eval(x)
}

pub fn eval_mero(m: &MeroScalar, x: f64) -> crate::Result<f64> {
    m.eval(x)
}

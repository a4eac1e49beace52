//! Dense log-domain determinant helpers.

use nalgebra::{DMatrix, LU};

use crate::error::{Error, Result};

/// Pivots below this magnitude are treated as an exact zero.
pub const PIVOT_UNDERFLOW: f64 = 1e-300;

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `log |det L U|` from the diagonal of `U`; `-inf` when a pivot underflows.
pub fn logdet_from_lu(lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let p = u[(i, i)].abs();
        if !(p >= PIVOT_UNDERFLOW) {
            return f64::NEG_INFINITY;
        }
        acc += p.ln();
    }
    acc
}

/// Log of the absolute determinant via row-pivoted LU.
///
/// Returns `f64::NEG_INFINITY` for numerically singular input. The empty
/// matrix has determinant one.
pub fn logdet_abs(m: &DMatrix<f64>) -> Result<f64> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(logdet_from_lu(&LU::new(m.clone())))
}

fn minor_matrix(m: &DMatrix<f64>, alpha: usize, alpha_prime: usize) -> Result<DMatrix<f64>> {
    check_square(m)?;
    let n = m.nrows();
    for idx in [alpha, alpha_prime] {
        if idx == 0 || idx > n {
            return Err(Error::IndexOutOfRange { index: idx, max: n });
        }
    }
    Ok(m.clone().remove_row(alpha_prime - 1).remove_column(alpha - 1))
}

/// The `(alpha', alpha)` minor: determinant of `m` with row `alpha_prime`
/// and column `alpha` deleted. Indices are 1-based.
pub fn minor_oracle(m: &DMatrix<f64>, alpha: usize, alpha_prime: usize) -> Result<f64> {
    let sub = minor_matrix(m, alpha, alpha_prime)?;
    if sub.nrows() == 0 {
        return Ok(1.0);
    }
    Ok(LU::new(sub).determinant())
}

/// `log |minor|` for matrices whose determinants would overflow.
pub fn log_minor_abs(m: &DMatrix<f64>, alpha: usize, alpha_prime: usize) -> Result<f64> {
    logdet_abs(&minor_matrix(m, alpha, alpha_prime)?)
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

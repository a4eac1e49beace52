//! Lyapunov exponents of scalar models from transfer-matrix products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasiperiodic::BlockModel;

/// Hopping magnitudes below this are treated like poles and skipped.
pub const MIN_HOPPING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub rate: f64,
    pub steps: usize,
    /// Orbit sites skipped because the potential or the hopping was singular.
    pub skipped: usize,
}

/// `(1/n) log‖Π T_j‖` with
/// `T_j = [[(V_j - E)/W_{j+1}, -W_j/W_{j+1}], [1, 0]]`, `V = λF + r_sign·R`,
/// renormalized after every step; `‖·‖` is the spectral norm.
pub fn lyapunov_transfer(
    model: &BlockModel,
    lambda: f64,
    energy: f64,
    x: f64,
    n_steps: usize,
) -> Result<LyapunovEstimate> {
    if model.l() != 1 {
        return Err(Error::DimensionMismatch(format!("transfer matrices need l = 1, got l = {}", model.l())));
    }
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be positive".into()));
    }
    let w = model.w(0, 0);
    let mut p = [[1.0_f64, 0.0], [0.0, 1.0]];
    let mut log_norm = 0.0;
    let (mut steps, mut skipped) = (0, 0);
    for j in 0..n_steps as i64 {
        let phase = model.site_phase(x, j);
        let (w_here, w_next) = (w.eval(phase), w.eval(model.site_phase(x, j + 1)));
        let v = match model.onsite(lambda, phase) {
            Ok(v) if w_next.abs() >= MIN_HOPPING => v[(0, 0)],
            _ => {
                skipped += 1;
                continue;
            }
        };
        let t = [[(v - energy) / w_next, -w_here / w_next], [1.0, 0.0]];
        p = [
            [t[0][0] * p[0][0] + t[0][1] * p[1][0], t[0][0] * p[0][1] + t[0][1] * p[1][1]],
            [p[0][0], p[0][1]],
        ];
        let norm = p.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
        log_norm += norm.ln();
        p.iter_mut().flatten().for_each(|c| *c /= norm);
        steps += 1;
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("every orbit site was singular".into()));
    }
    let s = p.iter().flatten().map(|c| c * c).sum::<f64>();
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    let spectral = ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    Ok(LyapunovEstimate { rate: (log_norm + spectral.ln()) / steps as f64, steps, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasiperiodic::models;

    /// Closed form of the Maryland Lyapunov exponent.
    fn maryland_gamma(lambda: f64, e: f64) -> f64 {
        ((((2.0 + e).powi(2) + lambda * lambda).sqrt() + ((2.0 - e).powi(2) + lambda * lambda).sqrt()) / 4.0).acosh()
    }

    #[test]
    fn free_laplacian_is_elliptic() {
        let est = lyapunov_transfer(&models::maryland(), 0.0, 0.0, 0.1, 1000).unwrap();
        assert!(est.rate.abs() < 1e-12);
    }

    #[test]
    fn maryland_matches_closed_form() {
        for &(lam, e) in &[(20.0, 0.0), (20.0, 5.0), (2.0, 1.0)] {
            let est = lyapunov_transfer(&models::maryland(), lam, e, 0.1, 200_000).unwrap();
            let g = maryland_gamma(lam, e);
            assert!((est.rate - g).abs() < 0.01 * g, "{lam} {e}: {} vs {g}", est.rate);
        }
    }

    #[test]
    fn step_doubling_converges() {
        let m = models::maryland();
        let a = lyapunov_transfer(&m, 10.0, 1.0, 0.3, 50_000).unwrap().rate;
        let b = lyapunov_transfer(&m, 10.0, 1.0, 0.3, 100_000).unwrap().rate;
        assert!((a - b).abs() < 0.01 * b);
    }

    #[test]
    fn needs_scalar_model() {
        assert!(lyapunov_transfer(&models::band_l2(), 1.0, 0.0, 0.0, 10).is_err());
    }
}

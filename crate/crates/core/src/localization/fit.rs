//! Exponential decay fits of block profiles.

use serde::{Deserialize, Serialize};

use crate::ergodic::ls_slope;
use crate::error::{Error, Result};

pub const DEFAULT_FLOOR: f64 = 1e-14;
/// Sites closer than this to the center are left out of the fit.
pub const CENTER_EXCLUSION: usize = 2;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Window-relative index of the largest entry (smallest index on ties).
    pub center: usize,
    /// Fitted rate, clipped at zero.
    pub rate: f64,
    /// RMS deviation of `log(profile)` from the fitted line.
    pub residual: f64,
    pub points: usize,
    /// Mean `|j - j*|` over the fitted sites.
    pub mean_distance: f64,
}

impl DecayFit {
    /// `residual / (rate · mean_distance)`: scatter relative to the fitted
    /// log-decay. Infinite when the rate is zero.
    pub fn relative_residual(&self) -> f64 {
        let signal = self.rate * self.mean_distance;
        if signal > 0.0 {
            self.residual / signal
        } else {
            f64::INFINITY
        }
    }
}

/// Least-squares fit of `log profile_j ≈ a - c|j - j*|` over sites above
/// `floor` with `|j - j*| >= 2`.
pub fn decay_fit(profile: &[f64], floor: f64) -> Result<DecayFit> {
    let center = profile
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (j, &v)| match best {
            Some((_, b)) if v <= b => best,
            _ => Some((j, v)),
        })
        .map(|b| b.0)
        .ok_or(Error::TooFewPoints { found: 0, needed: MIN_FIT_POINTS })?;
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .enumerate()
        .filter(|&(j, &v)| v > floor && j.abs_diff(center) >= CENTER_EXCLUSION)
        .map(|(j, &v)| (-(j.abs_diff(center) as f64), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { found: pts.len(), needed: MIN_FIT_POINTS });
    }
    let slope = ls_slope(&pts);
    let n = pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Ok(DecayFit { center, rate: slope.max(0.0), residual: (ss / n).sqrt(), points: pts.len(), mean_distance: -mx })
}

//! Birkhoff averages of `u(x) = (1/Nl) log|det H̃_N(x, E)|` along the
//! rotation orbit and the measure of the large-deviation set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, compensated_sum, midpoint_grid};
use crate::greens::{avg_logdet, log_density};
use crate::quasiperiodic::BlockModel;

/// Floor for `u` where the determinant underflows (≈ log of the smallest
/// normal double).
pub const UNDERFLOW_FLOOR: f64 = -690.0;
pub const DEFAULT_SIGMA: f64 = 0.3;
pub const DEFAULT_S: f64 = 1.0;
pub const DEFAULT_Q_LADDER: [usize; 5] = [10, 32, 100, 316, 1000];
/// The torus mean used as the reference is computed on a grid this many
/// times finer than the deviation grid.
pub const MEAN_REFINEMENT: usize = 4;
pub const MIN_DEVIATION_GRID: usize = 1000;

/// `u(x)` with the underflow floor applied; the flag records flooring.
pub fn floored_log_density(model: &BlockModel, lambda: f64, energy: f64, n: usize, x: f64) -> (f64, bool) {
    let u = log_density(model, lambda, energy, n, x);
    if u.is_finite() {
        (u, false)
    } else {
        (UNDERFLOW_FLOOR, true)
    }
}

/// `(1/Q) Σ_{j<Q} u(x + jω)`.
pub fn birkhoff_avg(model: &BlockModel, lambda: f64, energy: f64, n: usize, x: f64, omega: f64, q: usize) -> f64 {
    assert!(q >= 1, "orbit length must be positive");
    let terms = (0..q).map(|j| floored_log_density(model, lambda, energy, n, x + j as f64 * omega).0);
    compensated_sum(terms) / q as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    #[serde(rename = "Q")]
    pub q: usize,
    /// `S·Q^{-σ}`.
    pub threshold: f64,
    pub bad_fraction: f64,
    pub grid_size: usize,
    #[serde(rename = "S")]
    pub s: f64,
    pub sigma: f64,
    /// Reference value `∫u`.
    pub mean: f64,
    /// Orbit points where `u` hit the underflow floor, summed over the grid.
    pub floored: usize,
}

fn check_ldt_params(s: f64, sigma: f64, grid: &[f64]) -> Result<()> {
    if !(s >= 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("need S >= 0 and sigma > 0, got S={s}, sigma={sigma}")));
    }
    if grid.len() < MIN_DEVIATION_GRID {
        return Err(Error::InvalidParameter(format!(
            "deviation grid needs at least {MIN_DEVIATION_GRID} nodes, got {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Measures `{x : |(1/Q)Σ u(x+jω) - ∫u| >= S·Q^{-σ}}` on `grid` for every
/// `Q` in `qs` (ascending), reusing orbit prefixes across the ladder.
#[allow(clippy::too_many_arguments)]
pub fn deviation_ladder(
    model: &BlockModel,
    lambda: f64,
    energy: f64,
    n: usize,
    qs: &[usize],
    s: f64,
    sigma: f64,
    grid: &[f64],
) -> Result<Vec<DeviationReport>> {
    check_ldt_params(s, sigma, grid)?;
    if qs.is_empty() || qs.contains(&0) || qs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("Q ladder must be nonempty, positive and increasing".into()));
    }
    let mean = avg_logdet(model, lambda, energy, n, &midpoint_grid(MEAN_REFINEMENT * grid.len()))?.mean;
    let omega = model.omega();
    let q_max = *qs.last().unwrap();
    let per_node = exec::map(grid, |&x| {
        let mut averages = Vec::with_capacity(qs.len());
        let mut floored = 0;
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        let mut next = 0;
        for j in 0..q_max {
            let (u, hit) = floored_log_density(model, lambda, energy, n, x + j as f64 * omega);
            floored += hit as usize;
            let t = sum + u;
            comp += if sum.abs() >= u.abs() { (sum - t) + u } else { (u - t) + sum };
            sum = t;
            if j + 1 == qs[next] {
                averages.push((sum + comp) / qs[next] as f64);
                next += 1;
            }
        }
        (averages, floored)
    });
    let floored = per_node.iter().map(|p| p.1).sum();
    Ok(qs
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let threshold = s * (q as f64).powf(-sigma);
            let bad = per_node.iter().filter(|p| (p.0[i] - mean).abs() >= threshold).count();
            DeviationReport {
                q,
                threshold,
                bad_fraction: bad as f64 / grid.len() as f64,
                grid_size: grid.len(),
                s,
                sigma,
                mean,
                floored,
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
pub fn deviation_measure(
    model: &BlockModel,
    lambda: f64,
    energy: f64,
    n: usize,
    q: usize,
    s: f64,
    sigma: f64,
    grid: &[f64],
) -> Result<DeviationReport> {
    Ok(deviation_ladder(model, lambda, energy, n, &[q], s, sigma, grid)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdtFit {
    /// Slope of `log(bad_fraction)` against `-Q^σ`. Infinite when fewer than
    /// two ladder points have a nonzero fraction.
    pub c10: f64,
    /// Non-increasing in `Q` with at least one strict decrease.
    pub monotone: bool,
}

pub fn is_non_increasing(reports: &[DeviationReport]) -> bool {
    reports.windows(2).all(|w| w[1].bad_fraction <= w[0].bad_fraction)
}

/// Least-squares fit of `bad_fraction ≈ a·exp(-c₁₀ Q^σ)` over a ladder.
pub fn ldt_decay_fit(reports: &[DeviationReport]) -> Result<LdtFit> {
    let mut qs: Vec<usize> = reports.iter().map(|r| r.q).collect();
    qs.sort_unstable();
    qs.dedup();
    if qs.len() < 4 {
        return Err(Error::TooFewPoints { found: qs.len(), needed: 4 });
    }
    if reports.iter().all(|r| r.bad_fraction == 0.0) {
        return Err(Error::AllZero);
    }
    let mut sorted = reports.to_vec();
    sorted.sort_by_key(|r| r.q);
    let monotone = is_non_increasing(&sorted) && sorted.windows(2).any(|w| w[1].bad_fraction < w[0].bad_fraction);
    let pts: Vec<(f64, f64)> = sorted
        .iter()
        .filter(|r| r.bad_fraction > 0.0)
        .map(|r| (-(r.q as f64).powf(r.sigma), r.bad_fraction.ln()))
        .collect();
    let c10 = if pts.len() < 2 { f64::INFINITY } else { ls_slope(&pts) };
    Ok(LdtFit { c10, monotone })
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = compensated_sum(pts.iter().map(|p| p.0)) / n;
    let my = compensated_sum(pts.iter().map(|p| p.1)) / n;
    let sxy = compensated_sum(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    let sxx = compensated_sum(pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

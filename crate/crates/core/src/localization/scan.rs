//! Green's function decay over shifted windows and resolvent patching.
//!
//! For a window of `Nw = 2N₀ + 1` sites the decay constant is assembled from
//! three fitted pieces: the minor constant `C` (largest minor slack over the
//! scanned windows), the determinant constant `C₁ = log λ - ∫u_{Nw}`, and the
//! deviation allowance `δ = S·Nw^{-σ}`:
//!
//! `c₁₁ = (Nw/N₀)·(C + C₁ + log(1/λ + 1/|E|) + δ)`.
//!
//! With this choice a shift is bad only when its window determinant falls
//! below the torus mean by more than `δ` per site.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ergodic::{DEFAULT_S, DEFAULT_SIGMA};
use crate::error::{Error, Result};
use crate::exec::{self, midpoint_grid};
use crate::greens::{avg_logdet, resolvent, E_MIN, MIN_QUADRATURE_NODES};
use crate::operator::{assemble_h, OperatorParams, Window};
use crate::quasiperiodic::BlockModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    #[serde(rename = "S")]
    pub s: f64,
    pub sigma: f64,
    /// Nodes of the torus average behind `C₁`.
    pub quadrature_nodes: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { s: DEFAULT_S, sigma: DEFAULT_SIGMA, quadrature_nodes: 1024 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftStatus {
    Good,
    Bad,
    NearSingular,
    PoleSkipped,
}

impl ShiftStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ShiftStatus::Good => "good",
            ShiftStatus::Bad => "bad",
            ShiftStatus::NearSingular => "near_singular",
            ShiftStatus::PoleSkipped => "pole_skipped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    pub shift: i64,
    pub status: ShiftStatus,
    /// `max_{α,α'} [log|G(α,α')| + |p-p'| log(λ+|E|)] - c₁₁N₀l`.
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub lambda: f64,
    pub energy: f64,
    pub x0: f64,
    pub n0: usize,
    pub c11: f64,
    pub minor_constant: f64,
    pub det_constant: f64,
    pub deviation_allowance: f64,
    pub shifts: Vec<ShiftResult>,
    pub good_fraction: f64,
}

impl ScanReport {
    pub fn count(&self, status: ShiftStatus) -> usize {
        self.shifts.iter().filter(|s| s.status == status).count()
    }

    /// Shifts that are neither good nor skipped for a pole.
    pub fn bad_count(&self) -> usize {
        self.count(ShiftStatus::Bad) + self.count(ShiftStatus::NearSingular)
    }
}

/// `max [log|G(α,α')| + |p-p'|·rate]` over pairs with `|p-p'| > min_sep`
/// (every pair when `min_sep` is `None`).
pub fn decay_prefactor(g: &DMatrix<f64>, l: usize, rate: f64, min_sep: Option<usize>) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (j, col) in g.column_iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            let d = (i / l).abs_diff(j / l);
            if min_sep.is_some_and(|m| d <= m) || *v == 0.0 {
                continue;
            }
            best = best.max(v.abs().ln() + d as f64 * rate);
        }
    }
    best
}

fn max_log_minor(inv: &DMatrix<f64>, l: usize, rate: f64, logdet: f64) -> f64 {
    decay_prefactor(inv, l, rate, None) + logdet
}

enum Evaluated {
    Skipped,
    Singular,
    Done { green: f64, minor: f64 },
}

fn check_scan_inputs(lambda: f64, energy: f64, n0: usize) -> Result<()> {
    if energy.abs() < E_MIN {
        return Err(Error::InvalidParameter(format!("|E| must be at least {E_MIN:e}")));
    }
    if !(lambda > 0.0) || n0 == 0 {
        return Err(Error::InvalidParameter("need lambda > 0 and N0 >= 1".into()));
    }
    Ok(())
}

/// Evaluates `G` on `[-N₀ + j, N₀ + j]` for every shift `j`.
pub fn green_decay_scan(
    model: &BlockModel,
    lambda: f64,
    energy: f64,
    x0: f64,
    n0: usize,
    shifts: &[i64],
    options: ScanOptions,
) -> Result<ScanReport> {
    check_scan_inputs(lambda, energy, n0)?;
    if shifts.is_empty() || options.quadrature_nodes < MIN_QUADRATURE_NODES {
        return Err(Error::InvalidParameter("need at least one shift and a valid quadrature grid".into()));
    }
    let l = model.l();
    let nw = 2 * n0 + 1;
    let rate = (lambda + energy.abs()).ln();
    let evaluated = exec::map(shifts, |&j| {
        let params = OperatorParams { lambda, x: x0, energy, window: Window::centered(j, n0 as i64) };
        if assemble_h(model, &params).is_err() {
            return Evaluated::Skipped;
        }
        match resolvent(model, &params) {
            Ok(r) => Evaluated::Done {
                green: decay_prefactor(&r.g, l, rate, None),
                minor: max_log_minor(&r.htilde_inv, l, rate, r.logdet_htilde),
            },
            Err(_) => Evaluated::Singular,
        }
    });
    let dim = (nw * l) as f64;
    let minor_constant = evaluated
        .iter()
        .filter_map(|e| match e {
            Evaluated::Done { minor, .. } => Some(minor / dim),
            _ => None,
        })
        .fold(f64::NEG_INFINITY, f64::max)
        - (1.0 + lambda / energy.abs()).ln();
    let mean = avg_logdet(model, lambda, energy, nw, &midpoint_grid(options.quadrature_nodes))?.mean;
    let det_constant = lambda.ln() - mean;
    let deviation_allowance = options.s * (nw as f64).powf(-options.sigma);
    let per_site = minor_constant + det_constant + (1.0 / lambda + 1.0 / energy.abs()).ln() + deviation_allowance;
    let c11 = nw as f64 / n0 as f64 * per_site;
    let budget = c11 * (n0 * l) as f64;
    let results: Vec<ShiftResult> = shifts
        .iter()
        .zip(&evaluated)
        .map(|(&shift, e)| match e {
            Evaluated::Skipped => ShiftResult { shift, status: ShiftStatus::PoleSkipped, slack: None },
            Evaluated::Singular => ShiftResult { shift, status: ShiftStatus::NearSingular, slack: None },
            Evaluated::Done { green, .. } => {
                let slack = green - budget;
                let status = if slack <= 0.0 { ShiftStatus::Good } else { ShiftStatus::Bad };
                ShiftResult { shift, status, slack: Some(slack) }
            }
        })
        .collect();
    let good = results.iter().filter(|r| r.status == ShiftStatus::Good).count();
    Ok(ScanReport {
        lambda,
        energy,
        x0,
        n0,
        c11,
        minor_constant,
        det_constant,
        deviation_allowance,
        good_fraction: good as f64 / results.len() as f64,
        shifts: results,
    })
}

/// `max [log|G_Λ(α,α')| + |p-p'| log(λ+|E|)]` over pairs farther apart than
/// `min_sep` sites, computed directly on `window`.
pub fn window_decay_prefactor(
    model: &BlockModel,
    lambda: f64,
    energy: f64,
    x0: f64,
    window: Window,
    min_sep: Option<usize>,
) -> Result<f64> {
    let r = resolvent(model, &OperatorParams::new(lambda, x0, energy, window)?)?;
    Ok(decay_prefactor(&r.g, model.l(), (lambda + energy.abs()).ln(), min_sep))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub passed: bool,
    /// Largest connected union of good windows.
    pub union: Window,
    /// Whether `union` contains `[⌈√N₂⌉, 2N₂]`.
    pub covers_target: bool,
    /// Fitted `log` prefactor over pairs with `|p-p'| > N₂/10`.
    pub log_prefactor: f64,
    /// `2·c₁₁·N₀·l`.
    pub bound: f64,
    pub scan: ScanReport,
}

/// Scans the shifts `⌈√N₂⌉ ..= 2N₂`, joins the good windows into `Λ`, and
/// checks `|G_Λ(α,α')| <= A·e^{-|p-p'| log(λ+|E|)}` for `|p-p'| > N₂/10`
/// with `log A < 2·c₁₁·N₀·l`.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_patch_check(
    model: &BlockModel,
    lambda: f64,
    energy: f64,
    x0: f64,
    n0: usize,
    n2: usize,
    options: ScanOptions,
) -> Result<PatchReport> {
    check_scan_inputs(lambda, energy, n0)?;
    let lo = (n2 as f64).sqrt().ceil() as i64;
    let hi = 2 * n2 as i64;
    if hi < lo {
        return Err(Error::InvalidParameter(format!("N2 = {n2} leaves no shifts")));
    }
    let shifts: Vec<i64> = (lo..=hi).collect();
    let scan = green_decay_scan(model, lambda, energy, x0, n0, &shifts, options)?;
    let union = largest_union(&scan, n0 as i64).ok_or(Error::NearSingular {
        residual: f64::INFINITY,
        max_entry: f64::INFINITY,
    })?;
    let covers_target = union.u <= lo && hi <= union.v;
    let log_prefactor = window_decay_prefactor(model, lambda, energy, x0, union, Some(n2 / 10))?;
    let bound = 2.0 * scan.c11 * (n0 * model.l()) as f64;
    Ok(PatchReport { passed: covers_target && log_prefactor < bound, union, covers_target, log_prefactor, bound, scan })
}

fn largest_union(scan: &ScanReport, n0: i64) -> Option<Window> {
    let mut best: Option<Window> = None;
    let mut current: Option<Window> = None;
    for r in scan.shifts.iter().filter(|r| r.status == ShiftStatus::Good) {
        let w = Window::centered(r.shift, n0);
        current = match current {
            Some(c) if w.u <= c.v + 1 => Some(Window { u: c.u, v: w.v }),
            _ => Some(w),
        };
        let c = current.unwrap();
        if best.is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::eigensolve;
    use crate::quasiperiodic::models;

    #[test]
    fn eigenvalue_energy_flags_near_singular() {
        let m = models::maryland();
        let (lam, x0, n0) = (5.0, 0.1, 3);
        let h = assemble_h(&m, &OperatorParams::new(lam, x0, 0.0, Window::centered(0, n0)).unwrap()).unwrap();
        let e = eigensolve(&h).iter().map(|p| p.energy).find(|e| e.abs() > 1.0).unwrap();
        let rep = green_decay_scan(&m, lam, e, x0, n0 as usize, &[0, 40], ScanOptions::default()).unwrap();
        assert_eq!(rep.shifts[0].status, ShiftStatus::NearSingular);
        assert_ne!(rep.shifts[1].status, ShiftStatus::NearSingular);
    }

    #[test]
    fn far_energy_keeps_every_shift_good() {
        let m = models::band_l2();
        let lam = 50.0;
        let e = lam + 2.0 + 2.0 + 10.0 + 1.0;
        let shifts: Vec<i64> = (-20..20).collect();
        let rep = green_decay_scan(&m, lam, e, 0.2, 4, &shifts, ScanOptions::default()).unwrap();
        assert_eq!(rep.good_fraction, 1.0);
    }

    #[test]
    fn single_window_union_matches_scan() {
        let m = models::maryland();
        let (lam, e, x0, n0) = (20.0, 1.0, 0.1, 4);
        let rep = green_decay_scan(&m, lam, e, x0, n0, &[7], ScanOptions::default()).unwrap();
        let direct = window_decay_prefactor(&m, lam, e, x0, Window::centered(7, n0 as i64), None).unwrap();
        let slack = rep.shifts[0].slack.unwrap();
        assert!((direct - rep.c11 * n0 as f64 - slack).abs() < 1e-9);
    }

    #[test]
    fn union_joins_overlapping_good_windows() {
        let mk = |shift, status| ShiftResult { shift, status, slack: None };
        let scan = ScanReport {
            lambda: 1.0,
            energy: 1.0,
            x0: 0.0,
            n0: 2,
            c11: 0.0,
            minor_constant: 0.0,
            det_constant: 0.0,
            deviation_allowance: 0.0,
            shifts: vec![
                mk(0, ShiftStatus::Good),
                mk(1, ShiftStatus::Bad),
                mk(2, ShiftStatus::Good),
                mk(20, ShiftStatus::Good),
            ],
            good_fraction: 0.75,
        };
        assert_eq!(largest_union(&scan, 2), Some(Window { u: -2, v: 4 }));
    }
}

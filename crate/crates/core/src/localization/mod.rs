//! Eigenfunction decay on finite windows, Green's function decay scans over
//! orbit shifts, and patching of good windows with the resolvent identity.

pub mod eigen;
pub mod fit;
pub mod scan;
pub mod transfer;

pub use eigen::{block_profile, eigensolve, refine_eigenvector, EigenPair};
pub use fit::{decay_fit, DecayFit};
pub use scan::{green_decay_scan, resolvent_patch_check, PatchReport, ScanReport, ShiftResult, ShiftStatus};
pub use transfer::{lyapunov_transfer, LyapunovEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::operator::{assemble_h, OperatorParams, Window};
use crate::quasiperiodic::BlockModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizeOptions {
    /// Pairs centered closer than this to either window edge are not judged.
    pub margin: usize,
    pub floor: f64,
    /// A pair counts as localized when its rate reaches this fraction of
    /// `log(λ + |E|)`.
    pub rate_fraction: f64,
    /// Fits whose RMS log residual exceeds this fraction of the fitted
    /// log-decay report no rate.
    pub max_relative_residual: f64,
    /// Inverse-iteration steps applied to each eigenvector before profiling.
    pub refine_steps: usize,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self { margin: 32, floor: fit::DEFAULT_FLOOR, rate_fraction: 0.5, max_relative_residual: 0.5, refine_steps: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Relative residual above the gate; no rate reported.
    Rejected,
    /// Fewer than four sites above the floor (delta-like profile).
    TooFewPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub energy: f64,
    /// Lattice site of the profile maximum.
    pub center: i64,
    pub rate: Option<f64>,
    pub fit_residual: Option<f64>,
    /// `log(λ + |E|)`.
    pub target_rate: f64,
    pub status: FitStatus,
    pub interior: bool,
    pub localized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub lambda: f64,
    pub x0: f64,
    pub omega: f64,
    pub window: Window,
    pub options: LocalizeOptions,
    pub pairs: Vec<PairRecord>,
    pub interior: usize,
    pub localized: usize,
    /// `localized / interior`, zero when no pair is interior.
    pub fraction: f64,
}

/// Eigensolve on `[-N, N]` and fit every eigenvector's decay.
pub fn localize(model: &BlockModel, lambda: f64, x0: f64, n: usize, options: LocalizeOptions) -> Result<LocalizationReport> {
    if !(options.floor > 0.0) || !(options.max_relative_residual > 0.0) || !(options.rate_fraction >= 0.0) {
        return Err(Error::InvalidParameter("floor and residual gate must be positive".into()));
    }
    let window = Window::centered(0, n as i64);
    let h = assemble_h(model, &OperatorParams::new(lambda, x0, 0.0, window)?)?;
    let pairs = eigensolve(&h);
    let records = exec::map(&pairs, |pair| {
        let v = if options.refine_steps > 0 { refine_eigenvector(&h, pair, options.refine_steps) } else { pair.vector.clone() };
        let profile = block_profile(&v, model.l()).expect("eigenvector length is a multiple of l");
        let target = (lambda + pair.energy.abs()).ln();
        let (center, rate, fit_residual, status) = match decay_fit(&profile, options.floor) {
            Ok(f) if f.relative_residual() <= options.max_relative_residual => (f.center, Some(f.rate), Some(f.residual), FitStatus::Fitted),
            Ok(f) => (f.center, None, Some(f.residual), FitStatus::Rejected),
            Err(_) => (argmax(&profile), None, None, FitStatus::TooFewPoints),
        };
        let localized = match status {
            FitStatus::Fitted => rate.unwrap() >= options.rate_fraction * target,
            FitStatus::Rejected => false,
            FitStatus::TooFewPoints => true,
        };
        let interior = center >= options.margin && center + options.margin < profile.len();
        PairRecord {
            energy: pair.energy,
            center: window.u + center as i64,
            rate,
            fit_residual,
            target_rate: target,
            status,
            interior,
            localized,
        }
    });
    let interior = records.iter().filter(|r| r.interior).count();
    let localized = records.iter().filter(|r| r.interior && r.localized).count();
    Ok(LocalizationReport {
        lambda,
        x0,
        omega: model.omega(),
        window,
        options,
        pairs: records,
        interior,
        localized,
        fraction: if interior == 0 { 0.0 } else { localized as f64 / interior as f64 },
    })
}

fn argmax(profile: &[f64]) -> usize {
    profile.iter().enumerate().fold(0, |best, (j, &v)| if v > profile[best] { j } else { best })
}

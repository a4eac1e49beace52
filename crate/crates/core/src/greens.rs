//! Green's functions through the regularized matrix, the Cramer route to
//! individual entries, and empirical fits of the minor upper bound and the
//! averaged determinant lower bound.

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::{log_minor_abs, logdet_from_lu, max_abs};
use crate::operator::{assemble_htilde, index_split, m_blocks, OperatorParams, Window};
use crate::quasiperiodic::BlockModel;

/// Energies with `|E|` below this are left out of the minor-bound sweep,
/// where `log(1 + λ/|E|)` blows up.
pub const E_MIN: f64 = 1e-6;
/// Solve residual above which a resolvent is declared near-singular.
pub const SINGULAR_RESIDUAL: f64 = 1e-6;
/// `max |G|` above which `E` is treated as an eigenvalue (distance ≲ 1e-10).
pub const SINGULAR_GREEN: f64 = 1e10;
/// Grids for torus averages need at least this many nodes.
pub const MIN_QUADRATURE_NODES: usize = 512;
/// Largest tolerated fraction of underflowing quadrature nodes.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

/// `G = diag(M_j/√(1+E²))·H̃⁻¹` together with the pieces that produced it.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub g: DMatrix<f64>,
    pub htilde_inv: DMatrix<f64>,
    pub logdet_htilde: f64,
    /// `‖H̃·H̃⁻¹ - I‖_max`.
    pub residual: f64,
}

/// Row scaling `M_j(q)/√(1+E²)` for every flat index of the window.
pub fn row_scaling(model: &BlockModel, x: f64, energy: f64, window: Window) -> DVector<f64> {
    let s = 1.0 / (1.0 + energy * energy).sqrt();
    let blocks = m_blocks(model, x, window);
    DVector::from_iterator(blocks.len() * model.l(), blocks.iter().flat_map(|b| b.iter().map(move |m| m * s)))
}

/// Regularized-route resolvent over `params.window`.
pub fn resolvent(model: &BlockModel, params: &OperatorParams) -> Result<Resolvent> {
    let ht = assemble_htilde(model, params).to_dense();
    let n = ht.nrows();
    let lu = LU::new(ht.clone());
    let logdet = logdet_from_lu(&lu);
    let near_singular = |residual, max_entry| Error::NearSingular { residual, max_entry };
    if logdet == f64::NEG_INFINITY {
        return Err(near_singular(f64::INFINITY, f64::INFINITY));
    }
    let inv = lu.solve(&DMatrix::identity(n, n)).ok_or_else(|| near_singular(f64::INFINITY, f64::INFINITY))?;
    let residual = max_abs(&(&ht * &inv - DMatrix::<f64>::identity(n, n)));
    let d = row_scaling(model, params.x, params.energy, params.window);
    let mut g = inv.clone();
    for (i, mut row) in g.row_iter_mut().enumerate() {
        row *= d[i];
    }
    let max_entry = max_abs(&g);
    if !(residual <= SINGULAR_RESIDUAL) || !(max_entry <= SINGULAR_GREEN) {
        return Err(near_singular(residual, max_entry));
    }
    Ok(Resolvent { g, htilde_inv: inv, logdet_htilde: logdet, residual })
}

/// `G_N(x, E) = (H_N - E)⁻¹` computed as `diag(M_j/√(1+E²))·H̃_N⁻¹`.
pub fn green_full(model: &BlockModel, params: &OperatorParams) -> Result<DMatrix<f64>> {
    resolvent(model, params).map(|r| r.g)
}

/// 1-based flat indices into a window's Green's function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreenEntryQuery {
    pub alpha: usize,
    pub alpha_prime: usize,
}

/// `|G(α, α')|` from one minor and one determinant of `H̃`:
/// `|G(α,α')| = |M_{p+1}(q)|/√(1+E²) · |μ̃_(α,α')| / |det H̃|` with
/// `(p, q)` the site offset and intra-block index of `α`.
pub fn green_entry_cramer(model: &BlockModel, params: &OperatorParams, query: GreenEntryQuery) -> Result<f64> {
    let window = params.window;
    let (n, l) = (window.len(), model.l());
    let (p, q) = index_split(query.alpha, l, n)?;
    index_split(query.alpha_prime, l, n)?;
    let ht = assemble_htilde(model, params).to_dense();
    let log_minor = log_minor_abs(&ht, query.alpha, query.alpha_prime)?;
    let logdet = crate::linalg::logdet_abs(&ht)?;
    if logdet == f64::NEG_INFINITY {
        return Err(Error::NearSingular { residual: f64::INFINITY, max_entry: f64::INFINITY });
    }
    let phase = model.site_phase(params.x, window.u + p as i64);
    let m = model.m_diag(phase)[q - 1].abs() / (1.0 + params.energy * params.energy).sqrt();
    Ok(m * (log_minor - logdet).exp())
}

/// One evaluated point of a bound sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub n: usize,
    pub lambda: f64,
    pub energy: f64,
    /// Phase for pointwise bounds; `None` for torus averages.
    pub x: Option<f64>,
    /// Maximising `(α, α')` for minor bounds.
    pub pair: Option<(usize, usize)>,
    /// `(1/Nl) log|μ̃|` or the torus average of `(1/Nl) log|det H̃|`.
    pub quantity: f64,
    /// Smallest constant that makes the inequality hold at this sample.
    pub slack: f64,
}

/// Empirical constant for a bound, fitted as the largest sample slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFitReport {
    pub fitted_constant: f64,
    /// `max(slack) - fitted_constant`; non-positive when the bound holds.
    pub max_violation: f64,
    pub samples: Vec<BoundSample>,
    /// Samples skipped because `|E| < E_MIN`.
    pub excluded: usize,
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
}

impl BoundFitReport {
    fn from_samples(samples: Vec<BoundSample>, excluded: usize) -> Self {
        let fitted = samples.iter().map(|s| s.slack).fold(f64::NEG_INFINITY, f64::max);
        let mut ns: Vec<usize> = samples.iter().map(|s| s.n).collect();
        ns.sort_unstable();
        ns.dedup();
        let mut lambdas: Vec<f64> = samples.iter().map(|s| s.lambda).collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        let mut energies: Vec<f64> = samples.iter().map(|s| s.energy).collect();
        energies.sort_by(f64::total_cmp);
        energies.dedup();
        Self { fitted_constant: fitted, max_violation: 0.0, samples, excluded, ns, lambdas, energies }
            .with_violation()
    }

    fn with_violation(mut self) -> Self {
        self.max_violation = self
            .samples
            .iter()
            .map(|s| s.slack - self.fitted_constant)
            .fold(f64::NEG_INFINITY, f64::max);
        self
    }

    fn constant_where(&self, keep: impl Fn(&BoundSample) -> bool) -> f64 {
        self.samples.iter().filter(|s| keep(s)).map(|s| s.slack).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fitted constant restricted to each `N` of the sweep.
    pub fn constants_by_n(&self) -> Vec<(usize, f64)> {
        self.ns.iter().map(|&n| (n, self.constant_where(|s| s.n == n))).collect()
    }

    /// Fitted constant restricted to each `λ` of the sweep.
    pub fn constants_by_lambda(&self) -> Vec<(f64, f64)> {
        self.lambdas.iter().map(|&lam| (lam, self.constant_where(|s| s.lambda == lam))).collect()
    }

    /// `(max_N C_N - min_N C_N) / max_N |C_N|`.
    pub fn relative_spread_over_n(&self) -> f64 {
        relative_spread(self.constants_by_n().iter().map(|c| c.1))
    }
}

pub fn relative_spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        0.0
    } else {
        (hi - lo) / scale
    }
}

/// Energy list of a sweep, either absolute or as powers `E = λ^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySpec {
    Absolute(Vec<f64>),
    LambdaPowers(Vec<f64>),
}

impl EnergySpec {
    pub fn energies(&self, lambda: f64) -> Vec<f64> {
        match self {
            EnergySpec::Absolute(v) => v.clone(),
            EnergySpec::LambdaPowers(t) => t.iter().map(|&t| lambda.powf(t)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorSweep {
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub energies: EnergySpec,
    pub phases: Vec<f64>,
}

/// Slack of the minor bound
/// `(1/Nl) log|μ̃| <= -(|p-p'|/Nl) log(λ+|E|) + log(1+λ/|E|) + C`.
pub fn minor_slack(log_minor: f64, site_distance: usize, dim: usize, lambda: f64, energy: f64) -> f64 {
    let nl = dim as f64;
    log_minor / nl + site_distance as f64 * (lambda + energy.abs()).ln() / nl - (1.0 + lambda / energy.abs()).ln()
}

fn minor_sample(model: &BlockModel, n: usize, lambda: f64, energy: f64, x: f64) -> Result<BoundSample> {
    let l = model.l();
    let params = OperatorParams::new(lambda, x, energy, Window::first(n))?;
    let ht = assemble_htilde(model, &params).to_dense();
    let dim = n * l;
    let mut best = BoundSample {
        n,
        lambda,
        energy,
        x: Some(x),
        pair: None,
        quantity: f64::NEG_INFINITY,
        slack: f64::NEG_INFINITY,
    };
    for alpha in 1..=dim {
        for alpha_prime in 1..=dim {
            let log_minor = log_minor_abs(&ht, alpha, alpha_prime)?;
            if log_minor == f64::NEG_INFINITY {
                continue;
            }
            let d = ((alpha - 1) / l).abs_diff((alpha_prime - 1) / l);
            let slack = minor_slack(log_minor, d, dim, lambda, energy);
            if slack > best.slack {
                best.slack = slack;
                best.quantity = log_minor / dim as f64;
                best.pair = Some((alpha, alpha_prime));
            }
        }
    }
    Ok(best)
}

/// Fits the minor bound constant `C` over every `(N, λ, E, x, α, α')` of the
/// sweep. Each returned sample carries the worst pair at that `(N, λ, E, x)`.
pub fn check_minor_bound(model: &BlockModel, sweep: &MinorSweep) -> Result<BoundFitReport> {
    if sweep.ns.is_empty() || sweep.lambdas.is_empty() || sweep.phases.is_empty() {
        return Err(Error::InvalidParameter("minor sweep lists must be nonempty".into()));
    }
    let mut items = Vec::new();
    let mut excluded = 0;
    for &n in &sweep.ns {
        for &lambda in &sweep.lambdas {
            for energy in sweep.energies.energies(lambda) {
                if energy.abs() < E_MIN {
                    excluded += sweep.phases.len();
                    continue;
                }
                items.extend(sweep.phases.iter().map(|&x| (n, lambda, energy, x)));
            }
        }
    }
    let samples = exec::map(&items, |&(n, lambda, energy, x)| minor_sample(model, n, lambda, energy, x))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundFitReport::from_samples(samples, excluded))
}

/// `(1/Nl) log|det H̃_N(x, E)|` over the window `[1, N]`.
pub fn log_density(model: &BlockModel, lambda: f64, energy: f64, n: usize, x: f64) -> f64 {
    let params = OperatorParams { lambda, x, energy, window: Window::first(n) };
    let ht = assemble_htilde(model, &params).to_dense();
    logdet_from_lu(&LU::new(ht)) / (n * model.l()) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgLogdet {
    pub mean: f64,
    pub excluded: usize,
    pub nodes: usize,
}

/// Midpoint-rule estimate of `∫_T (1/Nl) log|det H̃_N(x,E)| dx`.
///
/// Nodes where the determinant underflows are dropped and counted.
pub fn avg_logdet(model: &BlockModel, lambda: f64, energy: f64, n: usize, grid: &[f64]) -> Result<AvgLogdet> {
    if grid.len() < MIN_QUADRATURE_NODES {
        return Err(Error::InvalidParameter(format!(
            "quadrature grid needs at least {MIN_QUADRATURE_NODES} nodes, got {}",
            grid.len()
        )));
    }
    OperatorParams::new(lambda, 0.0, energy, Window::first(n))?;
    let values = exec::map(grid, |&x| log_density(model, lambda, energy, n, x));
    let kept: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let excluded = values.len() - kept.len();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * values.len() as f64 {
        return Err(Error::TooManyExclusions { excluded, total: values.len() });
    }
    let mean = exec::compensated_sum(kept.iter().copied()) / kept.len() as f64;
    Ok(AvgLogdet { mean, excluded, nodes: grid.len() })
}

/// Fits `C₁` in `∫ (1/Nl) log|det H̃_N| dx >= log λ - C₁` over the sweep.
pub fn check_det_lower_bound(
    model: &BlockModel,
    lambdas: &[f64],
    energies: &EnergySpec,
    ns: &[usize],
    grid: &[f64],
) -> Result<BoundFitReport> {
    if lambdas.is_empty() || ns.is_empty() {
        return Err(Error::InvalidParameter("determinant sweep lists must be nonempty".into()));
    }
    let mut samples = Vec::new();
    for &n in ns {
        for &lambda in lambdas {
            if !(lambda > 0.0) {
                return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
            }
            for energy in energies.energies(lambda) {
                let avg = avg_logdet(model, lambda, energy, n, grid)?;
                samples.push(BoundSample {
                    n,
                    lambda,
                    energy,
                    x: None,
                    pair: None,
                    quantity: avg.mean,
                    slack: lambda.ln() - avg.mean,
                });
            }
        }
    }
    Ok(BoundFitReport::from_samples(samples, 0))
}

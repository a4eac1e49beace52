//! Finite-volume operators on index windows.
//!
//! Site `n` of a window uses the phase `x + nω`. The block at `(n, n+1)` is
//! `-W(x + (n+1)ω)`, its transpose sits at `(n+1, n)`, and the on-site block
//! is `λF(x + nω) + r_sign·R(x + nω)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasiperiodic::BlockModel;

/// Integer interval `[u, v]` of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub u: i64,
    pub v: i64,
}

impl Window {
    pub fn new(u: i64, v: i64) -> Result<Self> {
        if v < u {
            return Err(Error::InvalidParameter(format!("window [{u}, {v}] is empty")));
        }
        Ok(Self { u, v })
    }

    /// `[1, n]`.
    pub fn first(n: usize) -> Self {
        assert!(n >= 1, "window needs at least one site");
        Self { u: 1, v: n as i64 }
    }

    /// `[c - r, c + r]`.
    pub fn centered(c: i64, r: i64) -> Self {
        Self { u: c - r, v: c + r }
    }

    pub fn len(&self) -> usize {
        (self.v - self.u + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.u..=self.v
    }

    pub fn shifted(&self, s: i64) -> Self {
        Self { u: self.u + s, v: self.v + s }
    }

    pub fn contains(&self, n: i64) -> bool {
        self.u <= n && n <= self.v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub lambda: f64,
    pub x: f64,
    pub energy: f64,
    pub window: Window,
}

impl OperatorParams {
    /// Coupling must be finite and non-negative; `λ = 0` is kept for
    /// free-hopping controls.
    pub fn new(lambda: f64, x: f64, energy: f64, window: Window) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if !x.is_finite() || !energy.is_finite() {
            return Err(Error::InvalidParameter("phase and energy must be finite".into()));
        }
        Ok(Self { lambda, x, energy, window })
    }

    pub fn with_window(self, window: Window) -> Self {
        Self { window, ..self }
    }

    pub fn with_energy(self, energy: f64) -> Self {
        Self { energy, ..self }
    }

    pub fn with_x(self, x: f64) -> Self {
        Self { x, ..self }
    }
}

/// Block tridiagonal matrix with dense `l × l` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    l: usize,
    window: Window,
    diag: Vec<DMatrix<f64>>,
    /// `upper[k]` is block `(k, k+1)`.
    upper: Vec<DMatrix<f64>>,
    /// `lower[k]` is block `(k+1, k)`.
    lower: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    pub fn new(
        l: usize,
        window: Window,
        diag: Vec<DMatrix<f64>>,
        upper: Vec<DMatrix<f64>>,
        lower: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = window.len();
        let well_formed = diag.len() == n
            && upper.len() == n - 1
            && lower.len() == n - 1
            && diag.iter().chain(&upper).chain(&lower).all(|b| b.nrows() == l && b.ncols() == l);
        if !well_formed {
            return Err(Error::DimensionMismatch(format!(
                "block tridiagonal with {n} sites of size {l} needs {n} diagonal and {} off-diagonal blocks",
                n - 1
            )));
        }
        Ok(Self { l, window, diag, upper, lower })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_sites(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.l * self.diag.len()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn diag_block(&self, k: usize) -> &DMatrix<f64> {
        &self.diag[k]
    }

    pub fn upper_block(&self, k: usize) -> &DMatrix<f64> {
        &self.upper[k]
    }

    pub fn lower_block(&self, k: usize) -> &DMatrix<f64> {
        &self.lower[k]
    }

    /// Block `(i, j)` in window-relative indices, `None` outside the band.
    pub fn block(&self, i: usize, j: usize) -> Option<&DMatrix<f64>> {
        match j as i64 - i as i64 {
            0 => self.diag.get(i),
            1 => self.upper.get(i),
            -1 => self.lower.get(j),
            _ => None,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (l, n) = (self.l, self.n_sites());
        let mut m = DMatrix::zeros(n * l, n * l);
        for k in 0..n {
            m.view_mut((k * l, k * l), (l, l)).copy_from(&self.diag[k]);
            if k + 1 < n {
                m.view_mut((k * l, (k + 1) * l), (l, l)).copy_from(&self.upper[k]);
                m.view_mut(((k + 1) * l, k * l), (l, l)).copy_from(&self.lower[k]);
            }
        }
        m
    }

    /// Block-banded matrix-vector product.
    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        let (l, n) = (self.l, self.n_sites());
        assert_eq!(v.len(), n * l, "vector length must equal the matrix dimension");
        let mut out = DVector::zeros(n * l);
        for k in 0..n {
            let mut acc = &self.diag[k] * v.rows(k * l, l);
            if k + 1 < n {
                acc += &self.upper[k] * v.rows((k + 1) * l, l);
            }
            if k > 0 {
                acc += &self.lower[k - 1] * v.rows((k - 1) * l, l);
            }
            out.rows_mut(k * l, l).copy_from(&acc);
        }
        out
    }

    /// Copy with `shift` subtracted from every diagonal entry.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for d in &mut out.diag {
            for i in 0..self.l {
                d[(i, i)] -= shift;
            }
        }
        out
    }
}

pub fn to_dense(m: &BlockTridiagonal) -> DMatrix<f64> {
    m.to_dense()
}

/// `H_[u,v](x)`; fails when an orbit phase is within `pole_tol` of a pole.
pub fn assemble_h(model: &BlockModel, params: &OperatorParams) -> Result<BlockTridiagonal> {
    let window = params.window;
    let diag = window
        .sites()
        .map(|n| {
            let phase = model.site_phase(params.x, n);
            model.onsite(params.lambda, phase).map_err(|e| match e {
                Error::PoleProximity { phase, den_abs, .. } => Error::PoleProximity { site: Some(n), phase, den_abs },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut upper = Vec::with_capacity(window.len() - 1);
    let mut lower = Vec::with_capacity(window.len() - 1);
    for n in window.u..window.v {
        let w = model.eval_w(model.site_phase(params.x, n + 1));
        lower.push(-w.transpose());
        upper.push(-w);
    }
    BlockTridiagonal::new(model.l(), window, diag, upper, lower)
}

/// Column scalings `M_j(x) = M(x + jω)` of every site in the window.
pub fn m_blocks(model: &BlockModel, x: f64, window: Window) -> Vec<DVector<f64>> {
    window.sites().map(|n| model.m_diag(model.site_phase(x, n))).collect()
}

/// `H̃(x,E) = [H(x) - E]·diag(M_j(x))/√(1+E²)` over the window.
///
/// The on-site blocks come from numerators and denominators directly, so
/// the result is finite at every phase.
pub fn assemble_htilde(model: &BlockModel, params: &OperatorParams) -> BlockTridiagonal {
    let window = params.window;
    let scale = 1.0 / (1.0 + params.energy * params.energy).sqrt();
    let m = m_blocks(model, params.x, window);
    let scale_cols = |mut b: DMatrix<f64>, col: &DVector<f64>| {
        for (j, mut c) in b.column_iter_mut().enumerate() {
            c *= col[j] * scale;
        }
        b
    };
    let diag = window
        .sites()
        .map(|n| model.regularized_onsite(params.lambda, params.energy, model.site_phase(params.x, n)) * scale)
        .collect();
    let mut upper = Vec::with_capacity(window.len() - 1);
    let mut lower = Vec::with_capacity(window.len() - 1);
    for (k, n) in (window.u..window.v).enumerate() {
        let w = model.eval_w(model.site_phase(params.x, n + 1));
        lower.push(scale_cols(-w.transpose(), &m[k]));
        upper.push(scale_cols(-w, &m[k + 1]));
    }
    BlockTridiagonal::new(model.l(), window, diag, upper, lower).expect("blocks assembled with matching sizes")
}

/// Splits the 1-based flat index `alpha = p·l + q` into the site offset
/// `p ∈ [0, N-1]` and the intra-block index `q ∈ [1, l]`.
pub fn index_split(alpha: usize, l: usize, n_sites: usize) -> Result<(usize, usize)> {
    if alpha == 0 || alpha > n_sites * l {
        return Err(Error::IndexOutOfRange { index: alpha, max: n_sites * l });
    }
    Ok(((alpha - 1) / l, (alpha - 1) % l + 1))
}

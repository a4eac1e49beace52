use nalgebra::{DMatrix, DVector};

use super::diophantine::DiophantineParams;
use super::trig::{MeroScalar, TrigPoly, DEFAULT_POLE_TOL};
use crate::error::{Error, Result};

/// Sign in front of `R` in the on-site block `λF + r_sign·R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RSign {
    Plus,
    /// `λF - R`, the block Jacobi operator as written in the hopping form.
    #[default]
    Minus,
}

impl RSign {
    pub fn value(self) -> f64 {
        match self {
            RSign::Plus => 1.0,
            RSign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(RSign::Plus),
            -1 => Some(RSign::Minus),
            _ => None,
        }
    }
}

/// `l × l` symbol with meromorphic diagonal and analytic off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MeroMatrix {
    l: usize,
    diag: Vec<MeroScalar>,
    /// Row-major; diagonal slots hold the zero polynomial.
    off: Vec<TrigPoly>,
}

impl MeroMatrix {
    pub fn new(diag: Vec<MeroScalar>, off: Vec<TrigPoly>) -> Result<Self> {
        let l = diag.len();
        if l == 0 || off.len() != l * l {
            return Err(Error::InvalidModel(format!(
                "symbol needs {l} diagonal and {} off-diagonal entries, got {}",
                l * l,
                off.len()
            )));
        }
        let mut off = off;
        for i in 0..l {
            off[i * l + i] = TrigPoly::zero();
        }
        Ok(Self { l, diag, off })
    }

    /// Symbol with every entry zero (`0/1` on the diagonal).
    pub fn zeros(l: usize) -> Self {
        Self {
            l,
            diag: (0..l).map(|_| MeroScalar::analytic(TrigPoly::zero())).collect(),
            off: vec![TrigPoly::zero(); l * l],
        }
    }

    pub fn from_diagonal(diag: Vec<MeroScalar>) -> Self {
        let l = diag.len();
        Self { l, diag, off: vec![TrigPoly::zero(); l * l] }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn diag(&self, i: usize) -> &MeroScalar {
        &self.diag[i]
    }

    pub fn off(&self, i: usize, j: usize) -> &TrigPoly {
        &self.off[i * self.l + j]
    }

    fn set_pole_tol(&mut self, tol: f64) {
        for d in &mut self.diag {
            d.set_pole_tol(tol);
        }
    }

    /// Full evaluation; fails near a pole of any diagonal entry.
    pub fn eval(&self, x: f64) -> Result<DMatrix<f64>> {
        let l = self.l;
        let mut m = DMatrix::zeros(l, l);
        for i in 0..l {
            for j in 0..l {
                m[(i, j)] = if i == j { self.diag[i].eval(x)? } else { self.off[i * l + j].eval(x) };
            }
        }
        Ok(m)
    }

    fn is_symmetric(&self) -> bool {
        let l = self.l;
        (0..l).all(|i| (0..i).all(|j| self.off(i, j).approx_eq(self.off(j, i), 1e-14)))
    }
}

/// The triple `(W, R, F)` defining the block Jacobi operator
/// `[Hφ]_n = -(W_{n+1}φ_{n+1} + W_nᵀφ_{n-1} + R_nφ_n) + λF_nφ_n`
/// with `W_n(x) = W(x + nω)` and likewise for `R`, `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    l: usize,
    /// Row-major hopping symbol.
    w: Vec<TrigPoly>,
    r: MeroMatrix,
    f: MeroMatrix,
    omega: f64,
    dioph: DiophantineParams,
    pole_tol: f64,
    r_sign: RSign,
}

impl BlockModel {
    pub fn new(w: Vec<TrigPoly>, r: MeroMatrix, f: MeroMatrix, omega: f64) -> Result<Self> {
        let l = f.l();
        if l == 0 {
            return Err(Error::InvalidModel("block size l must be positive".into()));
        }
        if r.l() != l || w.len() != l * l {
            return Err(Error::InvalidModel(format!(
                "W, R, F must all be {l}x{l} (got W with {} entries, R of size {})",
                w.len(),
                r.l()
            )));
        }
        let model = Self {
            l,
            w,
            r,
            f,
            omega: 0.0,
            dioph: DiophantineParams::default(),
            pole_tol: DEFAULT_POLE_TOL,
            r_sign: RSign::default(),
        };
        let model = model.with_omega(omega)?;
        for i in 0..l {
            for j in 0..i {
                if !model.w(i, j).approx_eq(model.w(j, i), 1e-14) {
                    return Err(Error::InvalidModel(format!("W is not symmetric at ({i},{j})")));
                }
            }
        }
        if !model.r.is_symmetric() {
            return Err(Error::InvalidModel("R is not symmetric".into()));
        }
        if !model.f.is_symmetric() {
            return Err(Error::InvalidModel("F is not symmetric".into()));
        }
        Ok(model)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&omega) {
            return Err(Error::InvalidModel(format!("omega must lie in [0, 1), got {omega}")));
        }
        self.omega = omega;
        Ok(self)
    }

    pub fn with_dioph(mut self, dioph: DiophantineParams) -> Result<Self> {
        if !(dioph.a > 1.0 && dioph.c0 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "Diophantine parameters need A > 1 and C0 > 0, got A = {}, C0 = {}",
                dioph.a, dioph.c0
            )));
        }
        self.dioph = dioph;
        Ok(self)
    }

    pub fn with_pole_tol(mut self, pole_tol: f64) -> Result<Self> {
        if !(pole_tol > 0.0) {
            return Err(Error::InvalidModel(format!("pole_tol must be positive, got {pole_tol}")));
        }
        self.pole_tol = pole_tol;
        self.r.set_pole_tol(pole_tol);
        self.f.set_pole_tol(pole_tol);
        Ok(self)
    }

    pub fn with_r_sign(mut self, r_sign: RSign) -> Self {
        self.r_sign = r_sign;
        self
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dioph(&self) -> DiophantineParams {
        self.dioph
    }

    pub fn pole_tol(&self) -> f64 {
        self.pole_tol
    }

    pub fn r_sign(&self) -> RSign {
        self.r_sign
    }

    pub fn w(&self, i: usize, j: usize) -> &TrigPoly {
        &self.w[i * self.l + j]
    }

    pub fn r(&self) -> &MeroMatrix {
        &self.r
    }

    pub fn f(&self) -> &MeroMatrix {
        &self.f
    }

    /// Phase of site `n` on the orbit of `x`.
    pub fn site_phase(&self, x: f64, n: i64) -> f64 {
        x + n as f64 * self.omega
    }

    pub fn eval_w(&self, x: f64) -> DMatrix<f64> {
        let l = self.l;
        DMatrix::from_fn(l, l, |i, j| self.w(i, j).eval(x))
    }

    pub fn eval_r(&self, x: f64) -> Result<DMatrix<f64>> {
        self.r.eval(x)
    }

    pub fn eval_f(&self, x: f64) -> Result<DMatrix<f64>> {
        self.f.eval(x)
    }

    /// On-site block `λF(x) + r_sign·R(x)`.
    pub fn onsite(&self, lambda: f64, x: f64) -> Result<DMatrix<f64>> {
        Ok(self.eval_f(x)? * lambda + self.eval_r(x)? * self.r_sign.value())
    }

    /// Diagonal of `M(x) = diag(φᶠ_ii) diag(φᴿ_ii)`.
    pub fn m_diag(&self, x: f64) -> DVector<f64> {
        DVector::from_fn(self.l, |i, _| self.f.diag(i).den().eval(x) * self.r.diag(i).den().eval(x))
    }

    /// `M(x)` as an `l × l` diagonal matrix.
    pub fn eval_m(&self, x: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.m_diag(x))
    }

    /// `[λF(x) + r_sign·R(x) - E·I]·M(x)` from numerators and denominators
    /// directly, so it stays finite at poles.
    pub fn regularized_onsite(&self, lambda: f64, energy: f64, x: f64) -> DMatrix<f64> {
        let l = self.l;
        let rs = self.r_sign.value();
        let m = self.m_diag(x);
        DMatrix::from_fn(l, l, |i, j| {
            if i == j {
                let (fd, rd) = (self.f.diag(i), self.r.diag(i));
                let (fn_, fden) = (fd.num().eval(x), fd.den().eval(x));
                let (rn, rden) = (rd.num().eval(x), rd.den().eval(x));
                lambda * fn_ * rden + rs * rn * fden - energy * fden * rden
            } else {
                (lambda * self.f.off(i, j).eval(x) + rs * self.r.off(i, j).eval(x)) * m[j]
            }
        })
    }

    /// `det[(F(x) - tI) M(x)]`, evaluated without division.
    pub fn nondegeneracy_det(&self, t: f64, x: f64) -> f64 {
        let l = self.l;
        let m = self.m_diag(x);
        let a = DMatrix::from_fn(l, l, |i, j| {
            if i == j {
                let fd = self.f.diag(i);
                let rden = self.r.diag(i).den().eval(x);
                (fd.num().eval(x) - t * fd.den().eval(x)) * rden
            } else {
                self.f.off(i, j).eval(x) * m[j]
            }
        });
        a.determinant()
    }

    /// Phases in `[0,1)` where any diagonal denominator of `F` or `R` vanishes.
    pub fn pole_phases(&self) -> Vec<f64> {
        let mut all: Vec<f64> = (0..self.l)
            .flat_map(|i| {
                self.f.diag(i).zeros().iter().chain(self.r.diag(i).zeros()).copied().collect::<Vec<_>>()
            })
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// `true` when the hopping `W` vanishes identically.
    pub fn is_decoupled(&self) -> bool {
        self.w.iter().all(TrigPoly::is_zero)
    }
}

pub const NONDEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NondegeneracyWitness {
    pub t: f64,
    pub x: f64,
    pub det: f64,
}

/// For every `t`, finds the first grid phase where
/// `|det[(F(x) - tI) M(x)]| > 1e-10`.
pub fn check_nondegeneracy(
    model: &BlockModel,
    t_grid: &[f64],
    x_grid: &[f64],
) -> Result<Vec<NondegeneracyWitness>> {
    if t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::InvalidParameter("nondegeneracy grids must be nonempty".into()));
    }
    t_grid
        .iter()
        .map(|&t| {
            x_grid
                .iter()
                .find_map(|&x| {
                    let det = model.nondegeneracy_det(t, x);
                    (det.abs() > NONDEGENERACY_THRESHOLD).then_some(NondegeneracyWitness { t, x, det })
                })
                .ok_or(Error::AllDegenerate { t })
        })
        .collect()
}

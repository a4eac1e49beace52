//! Finite Fourier series on the unit torus and their ratios.
//!
//! Phases live in `[0, 1)`; a frequency-`k` mode is `exp(2πi k x)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Grid used to locate denominator zeros.
pub const ZERO_SCAN_GRID: usize = 4096;
/// Refined zeros satisfy `|den(z)| <= ZERO_TOL`.
pub const ZERO_TOL: f64 = 1e-10;
pub const DEFAULT_POLE_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;

/// Real-valued trigonometric polynomial `Σ c_k e^{2πikx}` with
/// `c_{-k} = conj(c_k)`.
///
/// Only the non-negative half of the spectrum is stored; the negative half
/// follows from Hermitian symmetry, so the invariant holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    /// `half[k]` is the coefficient of frequency `k >= 0`; `half[0]` is real.
    half: Vec<Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self { half: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn constant(c: f64) -> Self {
        Self { half: vec![Complex64::new(c, 0.0)] }
    }

    /// `amp · cos(2π k x)`.
    pub fn cos(k: u32, amp: f64) -> Self {
        let mut p = Self::zero();
        p.set_mode(k as usize, Complex64::new(amp / 2.0, 0.0));
        p
    }

    /// `amp · sin(2π k x)`.
    pub fn sin(k: u32, amp: f64) -> Self {
        let mut p = Self::zero();
        p.set_mode(k as usize, Complex64::new(0.0, -amp / 2.0));
        p
    }

    /// Builds a polynomial from a full coefficient table.
    ///
    /// Every frequency must appear together with its negative, carrying the
    /// conjugate coefficient; repeated frequencies are summed.
    pub fn from_coefficients<I>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut table: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k, c) in coeffs {
            *table.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let degree = table.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut half = vec![Complex64::new(0.0, 0.0); degree + 1];
        let zero = Complex64::new(0.0, 0.0);
        for k in 0..=degree as i64 {
            let pos = table.get(&k).copied().unwrap_or(zero);
            let neg = table.get(&-k).copied().unwrap_or(zero);
            let scale = pos.norm().max(neg.norm()).max(1.0);
            if (pos - neg.conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::NotHermitian { k });
            }
            half[k as usize] = if k == 0 { Complex64::new(pos.re, 0.0) } else { pos };
        }
        let mut p = Self { half };
        p.trim();
        Ok(p)
    }

    fn set_mode(&mut self, k: usize, c: Complex64) {
        if self.half.len() <= k {
            self.half.resize(k + 1, Complex64::new(0.0, 0.0));
        }
        self.half[k] = if k == 0 { Complex64::new(c.re, 0.0) } else { c };
        self.trim();
    }

    fn trim(&mut self) {
        while self.half.len() > 1 && self.half.last().is_some_and(|c| c.norm() == 0.0) {
            self.half.pop();
        }
    }

    /// Degree bound `K`.
    pub fn degree(&self) -> usize {
        self.half.len() - 1
    }

    /// Coefficient of frequency `k` (any sign).
    pub fn coeff(&self, k: i64) -> Complex64 {
        match self.half.get(k.unsigned_abs() as usize) {
            Some(&c) if k >= 0 => c,
            Some(&c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Full table `(k, c_k)` for `-K..=K`, skipping zero coefficients.
    pub fn coefficients(&self) -> Vec<(i64, Complex64)> {
        let k_max = self.degree() as i64;
        (-k_max..=k_max)
            .map(|k| (k, self.coeff(k)))
            .filter(|(_, c)| c.norm() != 0.0)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.half.iter().all(|c| c.norm() == 0.0)
    }

    /// `max_k |c_k|`.
    pub fn max_coeff_abs(&self) -> f64 {
        self.half.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Real value `Σ_k c_k e^{2πikx}`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        let mut acc = self.half[0].re;
        for (k, c) in self.half.iter().enumerate().skip(1) {
            if c.norm() == 0.0 {
                continue;
            }
            let (s, co) = (TAU * k as f64 * x).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }

    /// The complex sum over both halves of the spectrum, without using the
    /// symmetry. Its imaginary part measures the Hermitian residue.
    pub fn eval_complex(&self, x: f64) -> Complex64 {
        let x = x.rem_euclid(1.0);
        let k_max = self.degree() as i64;
        (-k_max..=k_max)
            .map(|k| self.coeff(k) * Complex64::from_polar(1.0, TAU * k as f64 * x))
            .sum()
    }

    /// Coefficientwise comparison.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let n = self.half.len().max(other.half.len()) as i64;
        (0..n).all(|k| (self.coeff(k) - other.coeff(k)).norm() <= tol)
    }
}

/// Refines every sign change of `den` on a uniform grid by bisection.
///
/// Zero pairs closer than one grid cell and even-multiplicity zeros are not
/// detected.
pub fn locate_zeros(den: &TrigPoly, grid_size: usize) -> Result<Vec<f64>> {
    if den.max_coeff_abs() == 0.0 {
        return Err(Error::DegenerateSymbol);
    }
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "zero scan grid must have at least 2 points, got {grid_size}"
        )));
    }
    let h = 1.0 / grid_size as f64;
    let values: Vec<f64> = (0..grid_size).map(|i| den.eval(i as f64 * h)).collect();
    let mut zeros = Vec::new();
    for i in 0..grid_size {
        let (a, fa) = (i as f64 * h, values[i]);
        let fb = values[(i + 1) % grid_size];
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(den, a, (i + 1) as f64 * h, fa).rem_euclid(1.0));
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    Ok(zeros)
}

fn bisect(p: &TrigPoly, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let neg_lo = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (p.eval(lo).abs(), p.eval(hi).abs());
    if flo <= fhi {
        lo
    } else {
        hi
    }
}

/// Ratio `num / den` of two trigonometric polynomials with its located
/// denominator zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct MeroScalar {
    num: TrigPoly,
    den: TrigPoly,
    zeros: Vec<f64>,
    pole_tol: f64,
}

impl MeroScalar {
    pub fn new(num: TrigPoly, den: TrigPoly) -> Result<Self> {
        Self::with_pole_tol(num, den, DEFAULT_POLE_TOL)
    }

    pub fn with_pole_tol(num: TrigPoly, den: TrigPoly, pole_tol: f64) -> Result<Self> {
        if !(pole_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("pole_tol must be positive, got {pole_tol}")));
        }
        let zeros = locate_zeros(&den, ZERO_SCAN_GRID)?;
        Ok(Self { num, den, zeros, pole_tol })
    }

    /// An analytic entry written as `num / 1`.
    pub fn analytic(num: TrigPoly) -> Self {
        Self { num, den: TrigPoly::constant(1.0), zeros: Vec::new(), pole_tol: DEFAULT_POLE_TOL }
    }

    pub fn num(&self) -> &TrigPoly {
        &self.num
    }

    pub fn den(&self) -> &TrigPoly {
        &self.den
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn pole_tol(&self) -> f64 {
        self.pole_tol
    }

    pub fn set_pole_tol(&mut self, pole_tol: f64) {
        self.pole_tol = pole_tol;
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let d = self.den.eval(x);
        if d.abs() < self.pole_tol {
            return Err(Error::PoleProximity { site: None, phase: x, den_abs: d.abs() });
        }
        Ok(self.num.eval(x) / d)
    }
}

#![allow(dead_code)]

use mqlab::operator::{assemble_h, OperatorParams, Window};
use mqlab::quasiperiodic::{MeroMatrix, GOLDEN};
use mqlab::{BlockModel, MeroScalar, TrigPoly};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real trigonometric polynomial of degree `deg` with coefficients of
/// size up to `amp`.
pub fn random_poly(rng: &mut ChaCha8Rng, deg: i64, c0: f64, amp: f64) -> TrigPoly {
    let mut coeffs = vec![(0, Complex64::new(c0, 0.0))];
    for k in 1..=deg {
        let c = Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp)) / 2.0;
        coeffs.push((k, c));
        coeffs.push((-k, c.conj()));
    }
    TrigPoly::from_coefficients(coeffs).unwrap()
}

/// `cos 2π(x - θ)`: simple zeros at `θ ± 1/4`.
pub fn shifted_cos(theta: f64) -> TrigPoly {
    let c = Complex64::from_polar(0.5, -std::f64::consts::TAU * theta);
    TrigPoly::from_coefficients([(1, c), (-1, c.conj())]).unwrap()
}

/// Random symmetric model of block size `l` with a pole on every diagonal
/// entry of `F` and on the first diagonal entry of `R`.
pub fn random_model(rng: &mut ChaCha8Rng, l: usize) -> BlockModel {
    let sym = |diag: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> MeroScalar, offamp: f64, rng: &mut ChaCha8Rng| {
        let d: Vec<MeroScalar> = (0..l).map(|i| diag(rng, i)).collect();
        let mut off = vec![TrigPoly::zero(); l * l];
        for i in 0..l {
            for j in i + 1..l {
                let c0 = rng.random_range(-offamp..offamp);
                let p = random_poly(rng, 1, c0, offamp);
                off[i * l + j] = p.clone();
                off[j * l + i] = p;
            }
        }
        MeroMatrix::new(d, off).unwrap()
    };
    let f = sym(
        &mut |rng, _| {
            let c0 = rng.random_range(-0.5..0.5);
            let num = random_poly(rng, 1, c0, 1.0);
            MeroScalar::new(num, shifted_cos(rng.random_range(0.0..1.0))).unwrap()
        },
        0.5,
        rng,
    );
    let r = sym(
        &mut |rng, i| {
            let c0 = rng.random_range(-0.5..0.5);
            let num = random_poly(rng, 2, c0, 0.5);
            if i == 0 {
                MeroScalar::new(num, shifted_cos(rng.random_range(0.0..1.0))).unwrap()
            } else {
                MeroScalar::analytic(num)
            }
        },
        0.3,
        rng,
    );
    let mut w = vec![TrigPoly::zero(); l * l];
    for i in 0..l {
        for j in i..l {
            let c0 = if i == j { 1.0 } else { rng.random_range(-0.3..0.3) };
            let p = random_poly(rng, 1, c0, 0.4);
            w[i * l + j] = p.clone();
            w[j * l + i] = p;
        }
    }
    BlockModel::new(w, r, f, GOLDEN).unwrap()
}

/// A phase at which `H` on `window` assembles with every denominator at
/// least `margin` away from zero.
pub fn pole_free_phase(rng: &mut ChaCha8Rng, model: &BlockModel, lambda: f64, window: Window, margin: f64) -> f64 {
    let strict = model.clone().with_pole_tol(margin).unwrap();
    loop {
        let x = rng.random_range(0.0..1.0);
        if assemble_h(&strict, &OperatorParams::new(lambda, x, 0.0, window).unwrap()).is_ok() {
            return x;
        }
    }
}

pub fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

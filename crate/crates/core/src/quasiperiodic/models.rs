//! Bundled example models.

use num_complex::Complex64;

use super::model::{BlockModel, MeroMatrix};
use super::trig::{MeroScalar, TrigPoly};
use super::GOLDEN;

fn tan_symbol() -> MeroScalar {
    MeroScalar::new(TrigPoly::sin(1, 1.0), TrigPoly::cos(1, 1.0)).expect("cos has simple zeros")
}

/// `l = 1`, `F = tan(2πx)`, `R = 0`, `W = 1`, golden-mean rotation.
pub fn maryland() -> BlockModel {
    BlockModel::new(
        vec![TrigPoly::constant(1.0)],
        MeroMatrix::zeros(1),
        MeroMatrix::from_diagonal(vec![tan_symbol()]),
        GOLDEN,
    )
    .expect("maryland model is valid")
}

/// Two-leg band operator: `F = diag(cos 2πx, cos 2π(x + 1/3))`, unit
/// hopping along and across the legs, analytic everywhere.
pub fn band_l2() -> BlockModel {
    let shifted = TrigPoly::from_coefficients([
        (1, Complex64::from_polar(0.5, std::f64::consts::TAU / 3.0)),
        (-1, Complex64::from_polar(0.5, -std::f64::consts::TAU / 3.0)),
    ])
    .expect("hermitian");
    let f = MeroMatrix::from_diagonal(vec![
        MeroScalar::analytic(TrigPoly::cos(1, 1.0)),
        MeroScalar::analytic(shifted),
    ]);
    let one = TrigPoly::constant(1.0);
    let r = MeroMatrix::new(
        vec![MeroScalar::analytic(TrigPoly::zero()), MeroScalar::analytic(TrigPoly::zero())],
        vec![TrigPoly::zero(), one.clone(), one.clone(), TrigPoly::zero()],
    )
    .expect("2x2");
    let w = vec![one.clone(), TrigPoly::zero(), TrigPoly::zero(), one];
    BlockModel::new(w, r, f, GOLDEN).expect("band model is valid")
}

/// Two-leg model with poles on both diagonals of `F` and `R`:
/// `F = [[tan, 0.3 cos], [0.3 cos, cot]]`,
/// `R = diag(0.5 sin / cos 4πx, 0.2 cos / (cos + 0.5))` plus 0.1 across,
/// `W = [[1 + 0.2 cos, 0.2], [0.2, 1]]`.
pub fn mero_l2() -> BlockModel {
    let cos = TrigPoly::cos(1, 1.0);
    let sin = TrigPoly::sin(1, 1.0);
    let cot = MeroScalar::new(cos.clone(), sin.clone()).expect("sin has simple zeros");
    let f = MeroMatrix::new(
        vec![tan_symbol(), cot],
        vec![TrigPoly::zero(), TrigPoly::cos(1, 0.3), TrigPoly::cos(1, 0.3), TrigPoly::zero()],
    )
    .expect("2x2");
    let shifted_cos = TrigPoly::from_coefficients([
        (0, Complex64::new(0.5, 0.0)),
        (1, Complex64::new(0.5, 0.0)),
        (-1, Complex64::new(0.5, 0.0)),
    ])
    .expect("hermitian");
    let r = MeroMatrix::new(
        vec![
            MeroScalar::new(TrigPoly::sin(1, 0.5), TrigPoly::cos(2, 1.0)).expect("simple zeros"),
            MeroScalar::new(TrigPoly::cos(1, 0.2), shifted_cos).expect("simple zeros"),
        ],
        vec![TrigPoly::zero(), TrigPoly::constant(0.1), TrigPoly::constant(0.1), TrigPoly::zero()],
    )
    .expect("2x2");
    let w11 = TrigPoly::from_coefficients([
        (0, Complex64::new(1.0, 0.0)),
        (1, Complex64::new(0.1, 0.0)),
        (-1, Complex64::new(0.1, 0.0)),
    ])
    .expect("hermitian");
    let w = vec![w11, TrigPoly::constant(0.2), TrigPoly::constant(0.2), TrigPoly::constant(1.0)];
    BlockModel::new(w, r, f, GOLDEN).expect("meromorphic model is valid")
}

/// Maryland potential with the hopping switched off.
pub fn maryland_decoupled() -> BlockModel {
    BlockModel::new(
        vec![TrigPoly::zero()],
        MeroMatrix::zeros(1),
        MeroMatrix::from_diagonal(vec![tan_symbol()]),
        GOLDEN,
    )
    .expect("valid")
}

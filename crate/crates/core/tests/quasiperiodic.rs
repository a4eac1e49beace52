mod common;

use mqlab::greens::green_full;
use mqlab::operator::{assemble_h, assemble_htilde, OperatorParams, Window};
use mqlab::quasiperiodic::{check_nondegeneracy, is_diophantine, parse_model, DiophantineParams, ModelFile, GOLDEN};
use mqlab::{models, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;

const BUNDLED: [(&str, &str); 3] = [
    ("maryland", include_str!("../../../models/maryland.json")),
    ("band_l2", include_str!("../../../models/band_l2.json")),
    ("mero_l2", include_str!("../../../models/mero_l2.json")),
];

#[test]
fn bundled_files_match_builtin_models() {
    let builtin = [models::maryland(), models::band_l2(), models::mero_l2()];
    for ((name, text), model) in BUNDLED.iter().zip(&builtin) {
        let parsed = parse_model(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut rng = common::rng(7);
        for _ in 0..100 {
            let x: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
            let (a, b) = (parsed.regularized_onsite(2.0, 0.3, x), model.regularized_onsite(2.0, 0.3, x));
            assert!(common::max_abs_diff(&a, &b) <= 1e-15, "{name} at {x}");
            assert_eq!(parsed.eval_w(x), model.eval_w(x));
        }
    }
}

#[test]
fn random_model_round_trip() {
    let mut rng = common::rng(11);
    for l in [1, 2, 3] {
        let model = common::random_model(&mut rng, l);
        let back = parse_model(&ModelFile::from_model(&model).to_json()).unwrap();
        for k in 0..100 {
            let x = (k as f64 + 0.5) / 100.0;
            let (a, b) = (back.regularized_onsite(3.0, -0.7, x), model.regularized_onsite(3.0, -0.7, x));
            assert!(common::max_abs_diff(&a, &b) <= 1e-15);
        }
    }
}

#[test]
fn bundled_models_satisfy_hypotheses() {
    let t_grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.25).collect();
    let x_grid: Vec<f64> = (0..64).map(|k| (k as f64 + 0.5) / 64.0).collect();
    for (name, text) in BUNDLED {
        let model = parse_model(text).unwrap();
        let w = check_nondegeneracy(&model, &t_grid, &x_grid).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(w.len(), t_grid.len());
        assert!(is_diophantine(model.omega(), model.dioph(), 1000).satisfied, "{name}");
    }
}

#[test]
fn rational_rotation_is_not_diophantine() {
    let check = is_diophantine(0.5, DiophantineParams::default(), 100);
    assert!(!check.satisfied);
    assert_eq!(check.worst_k, 2);
}

#[test]
fn pole_cancellation_in_htilde() {
    let m = models::maryland();
    // site 2 sits exactly on the pole of tan
    let x = 0.25 - 2.0 * GOLDEN;
    let p = OperatorParams::new(3.0, x.rem_euclid(1.0), 0.4, Window::first(4)).unwrap();
    assert!(matches!(assemble_h(&m, &p), Err(Error::PoleProximity { site: Some(2), .. })));
    let at = assemble_htilde(&m, &p).to_dense();
    assert!(at.iter().all(|v| v.is_finite()));
    // continuity through the pole
    let near = assemble_htilde(&m, &p.with_x(p.x + 1e-9)).to_dense();
    assert!(common::max_abs_diff(&at, &near) < 1e-7);
    // away from it, H̃ is (H - E)·M/√(1+E²)
    let q = p.with_x(p.x + 1e-3);
    let h = assemble_h(&m, &q).unwrap().shifted(q.energy).to_dense();
    let mdiag: Vec<f64> = (1..=4).map(|n| m.m_diag(m.site_phase(q.x, n))[0]).collect();
    let expect = h * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mdiag)) / (1.0 + 0.16_f64).sqrt();
    let got = assemble_htilde(&m, &q).to_dense();
    assert!(common::max_abs_diff(&expect, &got) < 1e-12 * expect.abs().max());
}

#[test]
fn mero_poles_cancel_on_both_diagonals() {
    let m = models::mero_l2();
    for pole in m.pole_phases() {
        let p = OperatorParams::new(2.0, pole, 0.3, Window::new(0, 2).unwrap()).unwrap();
        assert!(assemble_h(&m, &p).is_err());
        let a = assemble_htilde(&m, &p).to_dense();
        let b = assemble_htilde(&m, &p.with_x(pole + 1e-10)).to_dense();
        assert!(common::max_abs_diff(&a, &b) < 1e-8, "pole {pole}");
    }
}

fn dyadic_model() -> mqlab::BlockModel {
    models::mero_l2().with_omega(0.3125).unwrap()
}

proptest! {
    #[test]
    fn translation_covariance(k in 0u32..256, u in -20i64..20, len in 1i64..8, e in -4.0f64..4.0) {
        let m = dyadic_model();
        let x = f64::from(k) / 1024.0 + 1.0 / 2048.0;
        let w = Window::new(u, u + len - 1).unwrap();
        let base = OperatorParams::new(1.5, x, e, w).unwrap();
        let moved = OperatorParams::new(1.5, x + m.omega(), e, w).unwrap();
        let shifted = base.with_window(w.shifted(1));
        prop_assert_eq!(assemble_htilde(&m, &moved).to_dense(), assemble_htilde(&m, &shifted).to_dense());
        match (assemble_h(&m, &moved), assemble_h(&m, &shifted)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.to_dense(), b.to_dense());
                if let (Ok(ga), Ok(gb)) = (green_full(&m, &moved), green_full(&m, &shifted)) {
                    prop_assert_eq!(ga, gb);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "pole detection differs between equivalent windows"),
        }
    }

    #[test]
    fn h_is_symmetric(seed in 0u64..1000, n in 1usize..10, lam in 0.0f64..20.0) {
        let mut rng = common::rng(seed);
        let l = 1 + (seed % 3) as usize;
        let m = common::random_model(&mut rng, l);
        let x = common::pole_free_phase(&mut rng, &m, lam, Window::first(n), 1e-6);
        let h = assemble_h(&m, &OperatorParams::new(lam, x, 0.0, Window::first(n)).unwrap()).unwrap().to_dense();
        prop_assert_eq!(h.transpose(), h);
    }
}

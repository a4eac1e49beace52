//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use mqlab::ergodic::{deviation_ladder, is_non_increasing, DEFAULT_Q_LADDER};
use mqlab::exec::{compensated_sum, midpoint_grid};
use mqlab::greens::*;
use mqlab::linalg::{log_minor_abs, logdet_abs};
use mqlab::localization::scan::ScanOptions;
use mqlab::localization::*;
use mqlab::operator::{assemble_h, assemble_htilde, OperatorParams, Window};
use mqlab::models;
use nalgebra::DMatrix;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_instance(seed: u64, max_dim: usize) -> (mqlab::BlockModel, OperatorParams) {
    let mut rng = common::rng(seed);
    let l = rng.random_range(1..=2);
    let model = common::random_model(&mut rng, l);
    let n = rng.random_range(1..=max_dim / l);
    let lambda = rng.random_range(0.5..30.0);
    let energy = rng.random_range(-5.0..5.0);
    let x = common::pole_free_phase(&mut rng, &model, lambda, Window::first(n), 1e-4);
    (model, OperatorParams::new(lambda, x, energy, Window::first(n)).unwrap())
}

fn cramer() -> Outcome {
    let mut worst = 0.0_f64;
    let mut pairs = 0;
    for seed in 0..200 {
        let (model, p) = random_instance(10_000 + seed, 20);
        let ht = assemble_htilde(&model, &p).to_dense();
        let dim = ht.nrows();
        let inv = ht.clone().try_inverse().expect("pole-free instance is invertible");
        let logdet = logdet_abs(&ht).unwrap();
        for a in 1..=dim {
            for b in 1..=dim {
                let log_minor = log_minor_abs(&ht, a, b).unwrap();
                let lhs = inv[(a - 1, b - 1)].abs().ln() + logdet;
                worst = worst.max((lhs - log_minor).exp_m1().abs());
                pairs += 1;
            }
        }
    }
    outcome(worst <= 1e-8, format!("200 instances, {pairs} pairs, worst relative error {worst:.2e}"))
}

fn route_equivalence() -> Outcome {
    let (mut worst, mut checked, mut seed) = (0.0_f64, 0, 20_000);
    while checked < 100 {
        seed += 1;
        let (model, p) = random_instance(seed, 32);
        let Ok(g) = green_full(&model, &p) else { continue };
        let direct = assemble_h(&model, &p).unwrap().shifted(p.energy).to_dense().try_inverse().unwrap();
        worst = worst.max(common::max_abs_diff(&g, &direct) / direct.abs().max());
        checked += 1;
    }
    outcome(worst <= 1e-9, format!("100 instances (N·l <= 32), worst relative error {worst:.2e}"))
}

fn minor_bound() -> Outcome {
    let sweep = MinorSweep {
        ns: vec![4, 8, 16],
        lambdas: vec![10.0, 100.0, 1000.0],
        energies: EnergySpec::LambdaPowers(vec![0.0, 0.5, 1.0]),
        phases: (0..16).map(|k| (k as f64 + 0.37) / 16.0).collect(),
    };
    let rep = check_minor_bound(&models::maryland(), &sweep).unwrap();
    let spread = rep.relative_spread_over_n();
    let by_n: Vec<String> = rep.constants_by_n().iter().map(|(n, c)| format!("N={n}: {c:.4}")).collect();
    outcome(
        rep.fitted_constant.is_finite() && rep.max_violation <= 0.0 && spread < 0.5,
        format!("C = {:.4} ({}), spread across N {spread:.3}", rep.fitted_constant, by_n.join(", ")),
    )
}

fn det_lower_bound() -> Outcome {
    let m = models::maryland();
    let oracle = compensated_sum(midpoint_grid(1_000_000).iter().map(|y| (std::f64::consts::TAU * y).sin().abs().ln())) / 1e6;
    let grid = midpoint_grid(4096);
    let closed = [1.0, 10.0, 1000.0]
        .iter()
        .map(|&lam: &f64| (avg_logdet(&m, lam, 0.0, 1, &grid).unwrap().mean - (lam.ln() + oracle)).abs())
        .fold(0.0, f64::max);
    let rep = check_det_lower_bound(
        &m,
        &[100.0, 200.0, 1000.0, 2000.0],
        &EnergySpec::Absolute(vec![0.0, 0.5]),
        &[4, 16],
        &grid,
    )
    .unwrap();
    let by = rep.constants_by_lambda();
    let doubling = [(0, 1), (2, 3)].iter().map(|&(a, b)| (by[b].1 - by[a].1).abs() / by[a].1).fold(0.0, f64::max);
    outcome(
        (oracle + std::f64::consts::LN_2).abs() < 1e-5 && closed < 1e-3 && rep.fitted_constant < 5.0 && doubling <= 0.1,
        format!(
            "oracle ∫log|sin| = {oracle:.7}, closed-form error {closed:.1e}, C1 = {:.4}, doubling change {doubling:.2e}",
            rep.fitted_constant
        ),
    )
}

fn large_deviations() -> Outcome {
    let grid = midpoint_grid(2000);
    let ladder = |m: &mqlab::BlockModel| deviation_ladder(m, 50.0, 1.0, 1, &DEFAULT_Q_LADDER, 1.0, 0.3, &grid).unwrap();
    let golden = ladder(&models::maryland());
    let half = ladder(&models::maryland().with_omega(0.5).unwrap());
    let fr = |r: &[mqlab::ergodic::DeviationReport]| r.iter().map(|r| format!("{:.3}", r.bad_fraction)).collect::<Vec<_>>().join(" ");
    outcome(
        is_non_increasing(&golden) && !is_non_increasing(&half),
        format!("golden [{}], omega = 1/2 [{}]", fr(&golden), fr(&half)),
    )
}

fn localization() -> Outcome {
    let m = models::maryland();
    let rep = localize(&m, 20.0, 0.1, 256, LocalizeOptions::default()).unwrap();
    let mut errs: Vec<f64> = rep
        .pairs
        .iter()
        .filter(|p| p.interior)
        .filter_map(|p| {
            let rate = p.rate?;
            let gamma = lyapunov_transfer(&m, 20.0, p.energy, 0.1, 20_000).unwrap().rate;
            Some((rate - gamma).abs() / gamma)
        })
        .collect();
    errs.sort_by(f64::total_cmp);
    let median = if errs.is_empty() { f64::INFINITY } else { errs[errs.len() / 2] };
    let control = localize(&m, 0.0, 0.1, 256, LocalizeOptions::default()).unwrap();
    outcome(
        rep.fraction >= 0.9 && median <= 0.25 && control.fraction <= 0.05,
        format!(
            "localized {}/{} interior ({:.3}), median rate error vs Lyapunov {median:.3}, lambda = 0 control {:.3}",
            rep.localized, rep.interior, rep.fraction, control.fraction
        ),
    )
}

fn bad_shifts() -> Outcome {
    let m = models::maryland();
    let shifts: Vec<i64> = (-256..256).collect();
    let scan = green_decay_scan(&m, 20.0, 1.0, 0.1, 16, &shifts, ScanOptions::default()).unwrap();
    let limit = 512f64.powf(0.9);
    let patch = resolvent_patch_check(&m, 20.0, 1.0, 0.1, 16, 64, ScanOptions::default()).unwrap();
    outcome(
        (scan.bad_count() as f64) <= limit && patch.passed,
        format!(
            "bad shifts {} of 512 (limit {limit:.0}), c11 = {:.4}, patch over [{}, {}]: log prefactor {:.2} < {:.2}",
            scan.bad_count(),
            scan.c11,
            patch.union.u,
            patch.union.v,
            patch.log_prefactor,
            patch.bound
        ),
    )
}

fn invariants() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    // translation covariance with exactly representable phases
    let dy = models::mero_l2().with_omega(0.3125).unwrap();
    let w = Window::new(-3, 4).unwrap();
    let a = OperatorParams::new(1.5, 0.0703125 + 0.3125, 0.2, w).unwrap();
    let b = OperatorParams::new(1.5, 0.0703125, 0.2, w.shifted(1)).unwrap();
    check("translation covariance", assemble_htilde(&dy, &a).to_dense() == assemble_htilde(&dy, &b).to_dense());
    // pole cancellation
    let mary = models::maryland();
    let pole = OperatorParams::new(3.0, (0.25 - 2.0 * mqlab::quasiperiodic::GOLDEN).rem_euclid(1.0), 0.4, Window::first(4)).unwrap();
    let ht = assemble_htilde(&mary, &pole).to_dense();
    check("pole cancellation", assemble_h(&mary, &pole).is_err() && ht.iter().all(|v| v.is_finite()));
    // symmetry of H and G, eigen residuals and orthonormality
    for seed in 0..20 {
        let (m, p) = random_instance(30_000 + seed, 24);
        let h = assemble_h(&m, &p).unwrap();
        let hd = h.to_dense();
        check("H symmetric", hd == hd.transpose());
        if let Ok(g) = green_full(&m, &p) {
            check("G symmetric", common::max_abs_diff(&g, &g.transpose()) <= 1e-10 * g.abs().max());
        }
        let pairs = eigensolve(&h);
        let v = DMatrix::from_fn(h.dim(), pairs.len(), |i, k| pairs[k].vector[i]);
        check("orthonormality", common::max_abs_diff(&(v.transpose() * &v), &DMatrix::identity(h.dim(), h.dim())) < 1e-10);
        check("eigen residuals", pairs.iter().all(|q| q.residual <= 1e-8 * q.energy.abs().max(1.0)));
    }
    // boundary coupling on an interior eigenpair
    let big = Window::new(-20, 20).unwrap();
    let mp = OperatorParams::new(4.0, 0.1, 0.0, big).unwrap();
    let h = assemble_h(&mary, &mp).unwrap();
    let pair = &eigensolve(&h)[20];
    let (u, v) = (-5_i64, 7_i64);
    let idx = |n: i64| (n - big.u) as usize;
    let sub = assemble_h(&mary, &mp.with_window(Window::new(u, v).unwrap())).unwrap();
    let phi = nalgebra::DVector::from_column_slice(&pair.vector[idx(u)..=idx(v)]);
    let mut resid = sub.mul_vec(&phi) - &phi * pair.energy;
    resid[0] -= mary.eval_w(mary.site_phase(0.1, u))[(0, 0)] * pair.vector[idx(u - 1)];
    let last = resid.len() - 1;
    resid[last] -= mary.eval_w(mary.site_phase(0.1, v + 1))[(0, 0)] * pair.vector[idx(v + 1)];
    check("boundary coupling", resid.amax() < 1e-9);
    // decay-fit plant recovery
    let plant: Vec<f64> = (0..64).map(|j| (-0.7 * (j as f64 - 10.0).abs()).exp()).collect();
    let fit = decay_fit(&plant, 1e-14).unwrap();
    check("decay-fit plant", fit.center == 10 && (fit.rate - 0.7).abs() < 1e-6);
    outcome(failures.is_empty(), if failures.is_empty() { "all invariant checks hold".into() } else { format!("failed: {}", failures.join(", ")) })
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("Cramer identity for minors", Duration::from_secs(10), cramer),
        ("regularized route equals direct inverse", Duration::from_secs(30), route_equivalence),
        ("minor upper bound constant", Duration::from_secs(300), minor_bound),
        ("determinant lower bound", Duration::from_secs(120), det_lower_bound),
        ("large deviations along the orbit", Duration::from_secs(300), large_deviations),
        ("eigenfunction localization", Duration::from_secs(120), localization),
        ("sublinear bad shifts and patching", Duration::from_secs(300), bad_shifts),
        ("invariant suites", Duration::from_secs(300), invariants),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *budget;
        failed += !pass as usize;
        println!(
            "criterion {} {} {name}: {} [{:.2}s of {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

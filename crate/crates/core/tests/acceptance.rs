//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;
use std::time::Instant;

use dyadic_kinetics::closed_forms::*;
use dyadic_kinetics::evolution::*;
use dyadic_kinetics::fourier_grid::*;
use dyadic_kinetics::linear_analysis::*;
use dyadic_kinetics::metrics::*;
use dyadic_kinetics::physical::{PhysicalField, PhysicalGrid};
use dyadic_kinetics::physical_space::*;
use rand::Rng;

type Check = Result<String, String>;

fn deep_grid() -> Arc<DyadicGrid> {
    make_grid(1e-14, 32, 56).unwrap()
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Nonlinear Gaussian run to t = 200 sampled every 4 steps.
struct NonlinearRun {
    states: Vec<GridProfile>,
}

fn nonlinear_run() -> NonlinearRun {
    let grid = deep_grid();
    let psi = sample_real(&grid, gaussian_minus_steady, Taylor::ZERO).unwrap();
    let stepper = Stepper::new(Arc::new(NonlinearGain { lambda: 1.0 }), &grid, 1).unwrap();
    let steps = (200.0 / stepper.dt() + 1e-9).floor() as usize;
    let mut states = vec![psi.clone()];
    let mut s = psi.clone();
    for i in 1..=steps {
        s = stepper.step(&s).unwrap();
        if i % 4 == 0 {
            states.push(s.clone());
        }
    }
    NonlinearRun { states }
}

fn rate_check(states: &[GridProfile], label: &str, norm: impl Fn(&GridProfile) -> f64, sigma: f64) -> Check {
    let times: Vec<f64> = states.iter().map(|s| s.time).collect();
    let norms: Vec<f64> = states.iter().map(&norm).collect();
    let mut worst: f64 = 0.0;
    for (t, n) in times.iter().zip(&norms) {
        worst = worst.max(n / ((-sigma * t).exp() * norms[0]));
    }
    let fit = fit_decay(&times, &norms, None).map_err(|e| e.to_string())?;
    let msg = format!(
        "{label}: max ratio to bound {worst:.6}, fitted {:.5} vs σ {:.5}",
        fit.fitted_rate, sigma
    );
    ensure(worst <= 1.0 + 1e-3 && fit.fitted_rate > sigma - 0.005, msg)
}

fn criterion_1() -> Check {
    let g = make_grid(1e-4, 32, 24).unwrap();
    let phi = sample_real(&g, phi_steady, Taylor::UNIT).unwrap();
    let d = sample_real(&g, phi_steady_log_derivative, Taylor::ZERO).unwrap();
    let r = rhs_nonlinear(&phi, Derivative::Exact(&d)).map_err(|e| e.to_string())?.max_abs();
    ensure(r <= 1e-12, format!("max residual {r:e}"))
}

fn criterion_2() -> Check {
    let g = make_grid(1e-4, 32, 24).unwrap();
    let psi = sample_real(&g, psi0, Taylor::new(0.0, 0.0, -2.0)).unwrap();
    let d = sample_real(&g, psi0_log_derivative, Taylor::ZERO).unwrap();
    let r = rhs_linear(&psi, Derivative::Exact(&d)).map_err(|e| e.to_string())?.max_abs();
    ensure(r <= 1e-12, format!("max residual {r:e}"))
}

fn criterion_3() -> Check {
    let h = |x: f64| h_density(x, 1.0);
    let hh = i0_fn(&h, &h, 1e-10).map_err(|e| e.to_string())?;
    let gh = i0_fn(&g0_density, &h, 1e-10).map_err(|e| e.to_string())?;
    let pg = i0_fn(&phi0_density, &g0_rescaled_steady, 1e-10).map_err(|e| e.to_string())?;
    let e1 = (hh / (2.0 * LN_2 + 1.0) - 1.0).abs();
    let e2 = (gh / (-2.0 * LN_2 - 2.0) - 1.0).abs();
    let e3 = (pg + 1.0 / (8.0 * 1.5f64.exp())).abs();
    ensure(
        e1 <= 1e-5 && e2 <= 1e-5 && e3 <= 1e-6,
        format!("I0(H,H) {hh:.10} (rel {e1:.1e}), I0(g0,H) {gh:.10} (rel {e2:.1e}), I0(φ0,G0) {pg:.10} (abs {e3:.1e})"),
    )
}

fn criterion_4(run: &NonlinearRun) -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for k in [2.2, 2.5, 2.8] {
        match rate_check(&run.states, &format!("k={k}"), |s| norm_k(s, k).unwrap(), rate_sigma_k(k)) {
            Ok(m) => lines.push(m),
            Err(m) => {
                ok = false;
                lines.push(m)
            }
        }
    }
    ensure(ok, lines.join("; "))
}

fn criterion_5() -> Check {
    let grid = deep_grid();
    let stepper = Stepper::new(Arc::new(LinearGain), &grid, 1).unwrap();
    let mut s = sample_real(&grid, psi_test4, Taylor::ZERO).unwrap();
    let steps = (200.0 / stepper.dt() + 1e-9).floor() as usize;
    let mut states = vec![s.clone()];
    for i in 1..=steps {
        s = stepper.step(&s).unwrap();
        if i % 4 == 0 {
            states.push(s.clone());
        }
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for k in [2.2, 2.5, 2.8] {
        let a = rate_check(&states, &format!("k={k}"), |s| norm_k(s, k).unwrap(), rate_sigma_k(k));
        let b = rate_check(
            &states,
            &format!("k={k},p=2"),
            |s| norm_kp(s, k, 2.0).unwrap(),
            rate_sigma_kp(k, 2.0).unwrap(),
        );
        for r in [a, b] {
            match r {
                Ok(m) => lines.push(m),
                Err(m) => {
                    ok = false;
                    lines.push(m)
                }
            }
        }
    }
    ensure(ok, lines.join("; "))
}

fn criterion_6(run: &NonlinearRun) -> Check {
    let times: Vec<f64> = run.states.iter().map(|s| s.time).collect();
    let norms: Vec<f64> = run.states.iter().map(|s| sobolev_norm(s, 1.0, false).unwrap()).collect();
    let fit = fit_decay(&times, &norms, None).map_err(|e| e.to_string())?;
    let floor = rate_sigma_kp(2.7, 2.0).unwrap() - 0.01;
    ensure(fit.fitted_rate >= floor, format!("H¹ fitted rate {:.5} vs floor {floor:.5}", fit.fitted_rate))
}

fn criterion_7(run: &NonlinearRun) -> Check {
    let every = (run.states.len() / 25).max(1);
    let picked: Vec<&GridProfile> = run.states.iter().step_by(every).collect();
    let times: Vec<f64> = picked.iter().map(|s| s.time).collect();
    let mut norms = Vec::new();
    for s in &picked {
        norms.push(profile_weighted_l1(s, 0.0).map_err(|e| e.to_string())?);
    }
    let fit = fit_decay(&times, &norms, None).map_err(|e| e.to_string())?;
    let floor = 0.8 * (rate_sigma_kp(2.7, 2.0).unwrap() - 0.01);
    ensure(
        fit.fitted_rate >= floor,
        format!(
            "L¹ of g − H from {:.3e} to {:.3e}, fitted rate {:.5} vs floor {floor:.5}",
            norms[0],
            norms[norms.len() - 1],
            fit.fitted_rate
        ),
    )
}

fn criterion_8() -> Check {
    let g = make_grid(1e-4, 32, 24).unwrap();
    let p = sample_real(&g, gaussian_minus_steady, Taylor::ZERO).unwrap();
    let mut worst: f64 = 0.0;
    for k in [2.2, 2.5, 2.8] {
        let base = norm_k(&p, k).map_err(|e| e.to_string())?;
        for s in [1usize, 32, 96] {
            let lambda = 2f64.powf(s as f64 / 32.0);
            let q = drift_decay_apply(&p, s, 0.0);
            let v = norm_k(&q, k).map_err(|e| e.to_string())?;
            worst = worst.max((v / (lambda.powf(k) * base) - 1.0).abs());
        }
    }
    ensure(worst <= 1e-12, format!("max relative deviation {worst:e}"))
}

fn criterion_9() -> Check {
    let mut rng = common::rng(9);
    let grid = PhysicalGrid::new(40.0, 0.05).unwrap();
    let cfg = SplitConfig::new(10.0, 2.5).unwrap();
    let mut split_worst: f64 = 0.0;
    for _ in 0..10 {
        let h = common::mean_zero_field(&mut rng, &grid, 3, 5.0);
        let full = apply_lin_physical(&h).map_err(|e| e.to_string())?;
        let mut sum = PhysicalField::zeros(&grid);
        for part in SplitPart::ALL {
            sum = sum.add(&split_apply(&h, part, &cfg).map_err(|e| e.to_string())?).unwrap();
        }
        split_worst = split_worst.max(sum.sup_distance(&full).unwrap() / full.max_abs());
    }
    let grid = PhysicalGrid::new(80.0, 0.05).unwrap();
    let cfg = SplitConfig::new(100.0, 2.5).unwrap();
    let mut passed = 0;
    let mut worst_ratio = f64::NEG_INFINITY;
    for _ in 0..30 {
        let h = common::mean_zero_field(&mut rng, &grid, 3, 30.0);
        let d = dissipativity_value(&h, &cfg).map_err(|e| e.to_string())?;
        passed += d.holds() as usize;
        worst_ratio = worst_ratio.max(d.lhs / d.weighted_norm);
    }
    let nu = 0.9 * cfg.nu_target;
    ensure(
        split_worst <= 1e-8 && passed == 30,
        format!(
            "splitting rel err {split_worst:.2e}; dissipativity {passed}/30, worst lhs/‖h‖ {worst_ratio:.4} vs −ν {:.5}",
            -nu
        ),
    )
}

fn criterion_10() -> Check {
    let grid = PhysicalGrid::new(40.0, 0.05).unwrap();
    let h0 = PhysicalField::from_fn(&grid, psi_test4_density).unwrap();
    let cfg = SplitConfig::new(100.0, 2.5).unwrap();
    let opts = GapOptions { window: Some((50.0, 200.0)), ..Default::default() };
    let trace = gap_estimate_with(&cfg, &h0, 200.0, &opts).map_err(|e| e.to_string())?;
    let floor = nu_target(2.5) - 0.005;
    ensure(
        trace.fit.fitted_rate >= floor,
        format!(
            "fitted rate {:.5} (r² {:.4}) vs floor {floor:.5}, ‖h(200)‖ = {:.3e}",
            trace.fit.fitted_rate,
            trace.fit.r_squared,
            trace.norms[trace.norms.len() - 1]
        ),
    )
}

fn criterion_11() -> Check {
    let mut rng = common::rng(11);
    let mut lines = Vec::new();
    let mut ok = true;
    for k in [2.2, 2.5, 2.9] {
        let mut passed = 0;
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let mu = DiscreteMeasure::third_difference(
                rng.random_range(-5.0..5.0),
                rng.random_range(0.1..3.0),
                rng.random_range(-2.0..2.0),
            );
            let b = fourier_norm_bound_check(&mu, k).map_err(|e| e.to_string())?;
            passed += b.holds as usize;
            worst = worst.max(b.lhs / b.rhs);
        }
        ok &= passed == 100;
        lines.push(format!("k={k}: {passed}/100, max lhs/rhs {worst:.4}"));
    }
    ensure(ok, lines.join("; "))
}

fn criterion_12() -> Check {
    let grid = PhysicalGrid::new(20.0, 0.05).unwrap();
    let f = PhysicalField::from_fn(&grid, |x| normal_density(x, 1.0)).unwrap();
    let gain = q0_gain(&f, &f).map_err(|e| e.to_string())?;
    let dyadic = make_grid(1e-4, 32, 18).unwrap();
    let p = to_fourier(&gain, &dyadic).map_err(|e| e.to_string())?;
    let mut gain_err: f64 = 0.0;
    for (xi, v) in dyadic.xi().iter().zip(p.pos()) {
        gain_err = gain_err.max((v - (-xi * xi / 4.0).exp()).norm());
    }

    let wide = PhysicalGrid::new(200.0, 0.05).unwrap();
    let h = PhysicalField::from_fn(&wide, |x| h_density(x, 1.0)).unwrap();
    let q = q0_apply(&h, &h).map_err(|e| e.to_string())?;
    let drift = PhysicalField::from_fn(&wide, |x| 0.25 * (2.0 - 6.0 * x * x) / (PI * (1.0 + x * x).powi(3))).unwrap();
    let drift_err = q.sup_distance(&drift).unwrap() / drift.max_abs();

    let hf = |x: f64| h_density(x, 1.0);
    let e = weak_form_pairing_fn(&hf, &hf, WeakTestFunction::XSquared, 1e-11).map_err(|e| e.to_string())?;
    let energy_err = (e + 0.5).abs();
    ensure(
        gain_err <= 1e-6 && drift_err <= 1e-6 && energy_err <= 1e-6,
        format!("gain transform {gain_err:.1e}, Q0(H,H) − ¼(xH)′ {drift_err:.1e}, energy pairing {e:.12} ({energy_err:.1e})"),
    )
}

fn criterion_13(run: &NonlinearRun) -> Check {
    let t0_err = (T0 - 4.0 * (4.0f64 / 3.0).ln()).abs();
    let tau_err = (tau(1.0, 2.0, 1.0) - 2f64.sqrt().ln() / 3.0).abs();
    let mut prev = f64::NEG_INFINITY;
    let mut monotone = true;
    for i in 1..=20 {
        let v = tau(1.0, 2.0, 2f64.powi(-i));
        monotone &= v > prev;
        prev = v;
    }
    let ck = norm_k(&run.states[0], 2.5).map_err(|e| e.to_string())?;
    let cert = barrier_certificate(2.0, 1.0, ck, 2.5).map_err(|e| e.to_string())?;
    let env = cert.envelope();
    let mut worst = f64::INFINITY;
    let phi = sample_real(run.states[0].grid(), phi_steady, Taylor::UNIT).unwrap();
    for s in &run.states {
        let full = phi.add(s).unwrap();
        let c = barrier_envelope_check(&full, env);
        worst = worst.min(c.worst_margin);
    }
    ensure(
        t0_err <= 1e-12 && tau_err <= 1e-12 && monotone && worst >= -1e-14,
        format!(
            "t0 err {t0_err:e}, tau err {tau_err:e}, monotone {monotone}, C_k {ck:.6}, t* {:.3}, log2 c0 {:.1}, worst margin {worst:e}",
            cert.t_star, cert.log2_c0
        ),
    )
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: usize| only.is_empty() || only.contains(&id);
    let mut failed = 0;
    let mut report = |id: usize, name: &str, f: &dyn Fn() -> Check| {
        if !wanted(id) {
            return;
        }
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(m) => println!("criterion {id:>2} PASS {name}: {m} ({secs:.1}s)"),
            Err(m) => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {m} ({secs:.1}s)")
            }
        }
    };
    report(1, "stationarity", &criterion_1);
    report(2, "kernel", &criterion_2);
    report(3, "I0 identities", &criterion_3);
    let run = if [4, 6, 7, 13].iter().any(|&id| wanted(id)) {
        nonlinear_run()
    } else {
        NonlinearRun { states: Vec::new() }
    };
    report(4, "nonlinear rate dominance", &|| criterion_4(&run));
    report(5, "linear rate dominance", &criterion_5);
    report(6, "Sobolev relaxation", &|| criterion_6(&run));
    report(7, "L1 corollary", &|| criterion_7(&run));
    report(8, "scaling invariance", &criterion_8);
    report(9, "splitting and dissipativity", &criterion_9);
    report(10, "gap estimate", &criterion_10);
    report(11, "discrete measure bound", &criterion_11);
    report(12, "Fourier/physical consistency", &criterion_12);
    report(13, "certificates", &|| criterion_13(&run));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

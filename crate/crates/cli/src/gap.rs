//! `gap`: decay of the linearised semigroup in the weighted L¹ norm and the dissipativity
//! ensemble of its splitting.

use std::sync::Arc;

use dyadic_kinetics::closed_forms::psi_test4_density;
use dyadic_kinetics::linear_analysis::{dissipativity_value, gap_estimate_with, projection_p, GapOptions, SplitConfig};
use dyadic_kinetics::physical::{PhysicalField, PhysicalGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, CsvDoc};
use crate::Report;

/// `h − Ph` for a sum of `bumps` Gaussians with random sign, width in [0.5, 3] and centre in ±reach.
fn ensemble_member(rng: &mut ChaCha8Rng, grid: &Arc<PhysicalGrid>, bumps: usize, reach: f64) -> CliResult<PhysicalField> {
    let params: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-reach..reach), rng.random_range(0.5..3.0)))
        .collect();
    let h = PhysicalField::from_fn(grid, |x| params.iter().map(|&(c, m, w)| c * (-((x - m) / w).powi(2)).exp()).sum())?;
    Ok(h.sub(&projection_p(&h))?)
}

pub fn run(cfg: &RunConfig) -> CliResult<Report> {
    let gc = &cfg.gap;
    let split = SplitConfig::new(gc.r, gc.a)?;
    if gc.reach <= 0.0 || gc.bumps == 0 {
        return Err(CliError::Usage("gap.reach and gap.bumps must be positive".into()));
    }
    let pgrid = cfg.physical_grid()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut passed = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..gc.samples {
        let h = ensemble_member(&mut rng, &pgrid, gc.bumps, gc.reach)?;
        let d = dissipativity_value(&h, &split)?;
        passed += d.holds() as usize;
        if d.weighted_norm > 0.0 {
            worst = worst.max(d.lhs / d.weighted_norm);
        }
    }

    let h0 = PhysicalField::from_fn(&pgrid, psi_test4_density)?;
    let opts = GapOptions {
        grid: cfg.dyadic_grid()?,
        step_shift: cfg.run.step_shift,
        sample_interval: gc.sample_interval,
        window: gc.window.map(|w| (w[0], w[1])),
    };
    let trace = gap_estimate_with(&split, &h0, gc.t_end, &opts)?;
    let floor = split.nu_target - gc.tolerance;

    let mut doc = CsvDoc::new("gap", cfg, &["t", "weighted_norm"]);
    let lines = vec![
        format!("nu_target = {:.7}", split.nu_target),
        format!("fitted_rate = {:.7}", trace.fit.fitted_rate),
        format!("r_squared = {:.6}", trace.fit.r_squared),
        format!("dissipativity = {passed}/{} at R = {}, nu = {:.7}", gc.samples, gc.r, 0.9 * split.nu_target),
        format!("worst lhs/norm = {worst:.6}"),
    ];
    for l in &lines {
        doc.comment(l.clone());
    }
    for (t, n) in trace.times.iter().zip(&trace.norms) {
        doc.row([num(Some(*t)), num(Some(*n))]);
    }
    let mut failed = Vec::new();
    if passed < gc.samples {
        failed.push(format!("dissipativity held on {passed}/{} samples", gc.samples));
    }
    if trace.fit.fitted_rate < floor {
        failed.push(format!("fitted rate {:.6} below {floor:.6}", trace.fit.fitted_rate));
    }
    let failure = (!failed.is_empty()).then(|| CliError::Numerical(failed.join("; ")));
    let mut summary = vec![format!("gap: a = {}, R = {}", gc.a, gc.r)];
    summary.extend(lines);
    Ok(Report { command: "gap".into(), doc, summary, failure })
}

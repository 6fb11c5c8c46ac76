//! `rates`: fitted decay rates of the k-norms against the predicted rates.

use dyadic_kinetics::evolution::Stepper;
use dyadic_kinetics::metrics::{fit_decay, norm_k, norm_kp, rate_sigma_k, rate_sigma_kp};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, CsvDoc};
use crate::simulate::setup;
use crate::Report;

pub fn run(cfg: &RunConfig) -> CliResult<Report> {
    let rc = &cfg.rates;
    if rc.k.is_empty() {
        return Err(CliError::Usage("rates needs at least one k".into()));
    }
    let mut rows: Vec<(f64, Option<f64>)> = Vec::new();
    for &k in &rc.k {
        rows.push((k, None));
        for &p in &rc.p {
            rows.push((k, Some(p)));
        }
    }
    let formula = rows
        .iter()
        .map(|&(k, p)| match p {
            None => Ok(rate_sigma_k(k)),
            Some(p) => rate_sigma_kp(k, p),
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let grid = cfg.dyadic_grid()?;
    let s = setup(cfg, &rc.kind, &grid)?;
    let stepper = Stepper::new(s.dynamics.clone(), &grid, cfg.run.step_shift)?;
    let steps = (rc.t_end / stepper.dt() + 1e-9).floor() as usize;
    let norm = |state: &_, (k, p): (f64, Option<f64>)| match p {
        None => norm_k(state, k),
        Some(p) => norm_kp(state, k, p),
    };
    let mut times = vec![0.0];
    let mut series: Vec<Vec<f64>> = rows.iter().map(|&r| norm(&s.initial, r).map(|v| vec![v])).collect::<Result<_, _>>()?;
    let mut state = s.initial.clone();
    for i in 1..=steps {
        state = stepper.step(&state)?;
        if i % cfg.run.sample_every == 0 {
            times.push(state.time);
            for (col, &r) in series.iter_mut().zip(&rows) {
                col.push(norm(&state, r)?);
            }
        }
    }

    let window = rc.window.map(|w| (w[0], w[1]));
    let mut doc = CsvDoc::new("rates", cfg, &["k", "p", "sigma_formula", "sigma_fitted", "margin"]);
    doc.comment(format!("datum = {}", s.datum.label()));
    doc.comment(format!("dynamics = {}", s.dynamics.name()));
    let mut summary = vec![format!("rates: {} rows, flow {}, t_end {}", rows.len(), s.dynamics.name(), rc.t_end)];
    let mut failed = Vec::new();
    for ((&(k, p), sigma), norms) in rows.iter().zip(&formula).zip(&series) {
        let fit = fit_decay(&times, norms, window)?;
        let margin = fit.fitted_rate - sigma;
        doc.row([num(Some(k)), num(p), num(Some(*sigma)), num(Some(fit.fitted_rate)), num(Some(margin))]);
        let label = match p {
            None => format!("k = {k}"),
            Some(p) => format!("k = {k}, p = {p}"),
        };
        summary.push(format!("{label}: formula {sigma:.6}, fitted {:.6}, margin {margin:+.6}", fit.fitted_rate));
        if margin < -rc.tolerance {
            failed.push(format!("{label}: margin {margin:.6} below -{}", rc.tolerance));
        }
    }
    let failure = (!failed.is_empty()).then(|| CliError::Numerical(failed.join("; ")));
    Ok(Report { command: "rates".into(), doc, summary, failure })
}

//! `simulate` and `linear`: one run of a flow with sampled observables.

use std::path::PathBuf;
use std::sync::Arc;

use dyadic_kinetics::evolution::{
    default_dynamics, default_initial_data, default_observables, evolve, DatumParams, Dynamics,
    EvolveConfig, InitialDatum, Observable, COLUMNS,
};
use dyadic_kinetics::fourier_grid::{DyadicGrid, GridProfile};

use crate::config::{self, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, CsvDoc};
use crate::Report;

/// Flow, datum and stepped initial state of a run.
pub struct Setup {
    pub dynamics: Arc<dyn Dynamics>,
    pub datum: Arc<dyn InitialDatum>,
    pub initial: GridProfile,
}

pub fn setup(cfg: &RunConfig, kind: &str, grid: &Arc<DyadicGrid>) -> CliResult<Setup> {
    let nonlinear = kind == "nonlinear";
    let name = cfg.run.datum.clone().unwrap_or_else(|| if nonlinear { "gaussian" } else { "psi_test4" }.into());
    let params = DatumParams { lambda: cfg.run.lambda, path: cfg.run.samples_path.as_ref().map(PathBuf::from) };
    let datum = default_initial_data().get(&name)?.build(&params)?;
    let dynamics = default_dynamics().get(kind)?.build(if nonlinear { datum.reference_scale() } else { 1.0 })?;
    let initial = datum.state(grid, nonlinear)?;
    Ok(Setup { dynamics, datum, initial })
}

fn observers(cfg: &RunConfig) -> CliResult<Vec<Arc<dyn Observable>>> {
    let listed = if cfg.observables.is_empty() { config::default_observables() } else { cfg.observables.clone() };
    let registry = default_observables();
    listed.iter().map(|o| Ok(registry.get(&o.name)?.build(&o.params())?)).collect()
}

pub fn run(cfg: &RunConfig, default_kind: &str) -> CliResult<Report> {
    let kind = cfg.run.kind.clone().unwrap_or_else(|| default_kind.to_string());
    let command = if kind == "linear" { "linear" } else { "simulate" };
    let grid = cfg.dyadic_grid()?;
    let s = setup(cfg, &kind, &grid)?;
    let obs = observers(cfg)?;
    let ec = EvolveConfig { step_shift: cfg.run.step_shift, t_end: cfg.run.t_end, sample_every: cfg.run.sample_every };

    let mut header = vec!["t"];
    header.extend(COLUMNS.iter().map(|c| c.header()));
    let mut doc = CsvDoc::new(command, cfg, &header);
    doc.comment(format!("datum = {}", s.datum.label()));
    doc.comment(format!("dynamics = {}", s.dynamics.name()));

    let mut summary = vec![format!("{command}: datum {}, flow {}", s.datum.label(), s.dynamics.name())];
    let failure = match evolve(&s.initial, s.dynamics.clone(), &ec, &obs) {
        Ok(trace) => {
            doc.comment(format!("dt = {:e}", trace.dt));
            for (t, r) in trace.times.iter().zip(&trace.rows) {
                doc.row(std::iter::once(num(Some(*t))).chain(r.iter().map(|v| num(*v))));
            }
            for d in &trace.diagnostics {
                doc.trailer(format!("diagnostic t = {:e}: {}", d.time, d.message));
            }
            summary.push(format!("{} samples up to t = {}", trace.times.len(), trace.times.last().copied().unwrap_or(0.0)));
            if !trace.diagnostics.is_empty() {
                summary.push(format!("{} diagnostics recorded", trace.diagnostics.len()));
            }
            None
        }
        Err(e) => {
            let e = CliError::from(e);
            if let CliError::Usage(_) = e {
                return Err(e);
            }
            doc.trailer(format!("aborted: {e}"));
            Some(e)
        }
    };
    Ok(Report { command: command.into(), doc, summary, failure })
}

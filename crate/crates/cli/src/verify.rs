//! `verify`: closed-form identities with their residuals.

use std::f64::consts::LN_2;

use dyadic_kinetics::closed_forms::{
    g0_density, h_density, lorentzian, phi_steady, phi_steady_log_derivative, psi0, psi0_log_derivative,
};
use dyadic_kinetics::evolution::{rhs_linear, rhs_nonlinear, Derivative};
use dyadic_kinetics::fourier_grid::{make_grid, sample_real, Taylor};
use dyadic_kinetics::linear_analysis::{g0_rescaled_steady, i0_fn, phi0_density};
use dyadic_kinetics::metrics::{fourier_norm_bound_check, DiscreteMeasure};
use dyadic_kinetics::physical::{PhysicalField, PhysicalGrid};
use dyadic_kinetics::physical_space::to_fourier;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, CsvDoc};
use crate::Report;

pub const IDENTITIES: [&str; 8] = [
    "phi_stationarity",
    "psi0_kernel",
    "i0_h_h",
    "i0_g0_h",
    "i0_phi0_g0",
    "transform_h",
    "transform_lorentzian",
    "discrete_bound",
];

struct Row {
    name: &'static str,
    value: f64,
    target: f64,
    /// Residual as a function of the value.
    residual: fn(f64, f64) -> f64,
    tolerance: f64,
}

fn absolute(v: f64, t: f64) -> f64 {
    (v - t).abs()
}

fn relative(v: f64, t: f64) -> f64 {
    (v / t - 1.0).abs()
}

/// Excess of a ratio over its bound.
fn excess(v: f64, t: f64) -> f64 {
    (v - t).max(0.0)
}

fn rows() -> CliResult<Vec<Row>> {
    let g = make_grid(1e-4, 32, 24)?;
    let phi = sample_real(&g, phi_steady, Taylor::UNIT)?;
    let d = sample_real(&g, phi_steady_log_derivative, Taylor::ZERO)?;
    let stationarity = rhs_nonlinear(&phi, Derivative::Exact(&d))?.max_abs();
    let p0 = sample_real(&g, psi0, Taylor::new(0.0, 0.0, -2.0))?;
    let d0 = sample_real(&g, psi0_log_derivative, Taylor::ZERO)?;
    let kernel = rhs_linear(&p0, Derivative::Exact(&d0))?.max_abs();

    let h = |x: f64| h_density(x, 1.0);
    let i0_hh = i0_fn(&h, &h, 1e-10)?;
    let i0_gh = i0_fn(&g0_density, &h, 1e-10)?;
    let i0_pg = i0_fn(&phi0_density, &g0_rescaled_steady, 1e-10)?;

    let x = PhysicalGrid::new(200.0, 0.05)?;
    let fg = make_grid(1e-3, 16, 16)?;
    let th = to_fourier(&PhysicalField::from_fn(&x, h)?, &fg)?;
    let tl = to_fourier(&PhysicalField::from_fn(&x, lorentzian)?, &fg)?;
    let mut err_h: f64 = 0.0;
    let mut err_l: f64 = 0.0;
    for (j, &xi) in fg.xi().iter().enumerate() {
        err_h = err_h.max((th.pos()[j] - phi_steady(xi)).norm());
        err_l = err_l.max((tl.pos()[j] - (-xi).exp()).norm());
    }

    let mut ratio: f64 = 0.0;
    for k in [2.2, 2.5, 2.9] {
        for (x0, s, c) in [(-1.5, 1.0, 1.0), (0.3, 0.4, -2.0), (-4.0, 2.5, 0.7)] {
            let b = fourier_norm_bound_check(&DiscreteMeasure::third_difference(x0, s, c), k)?;
            ratio = ratio.max(b.lhs / b.rhs);
        }
    }

    Ok(vec![
        Row { name: IDENTITIES[0], value: stationarity, target: 0.0, residual: absolute, tolerance: 1e-12 },
        Row { name: IDENTITIES[1], value: kernel, target: 0.0, residual: absolute, tolerance: 1e-12 },
        Row { name: IDENTITIES[2], value: i0_hh, target: 2.0 * LN_2 + 1.0, residual: relative, tolerance: 1e-5 },
        Row { name: IDENTITIES[3], value: i0_gh, target: -2.0 * LN_2 - 2.0, residual: relative, tolerance: 1e-5 },
        Row {
            name: IDENTITIES[4],
            value: i0_pg,
            target: -1.0 / (8.0 * 1.5f64.exp()),
            residual: absolute,
            tolerance: 1e-6,
        },
        Row { name: IDENTITIES[5], value: err_h, target: 0.0, residual: absolute, tolerance: 1e-6 },
        Row { name: IDENTITIES[6], value: err_l, target: 0.0, residual: absolute, tolerance: 1e-6 },
        Row { name: IDENTITIES[7], value: ratio, target: 1.0, residual: excess, tolerance: 0.0 },
    ])
}

/// Seven decimals, or scientific notation for small magnitudes.
fn short(v: f64) -> String {
    if v == 0.0 || v.abs() >= 1e-3 {
        format!("{v:.7}")
    } else {
        format!("{v:.3e}")
    }
}

/// `fault` names an identity whose value is perturbed before checking.
pub fn run(cfg: &RunConfig, fault: Option<&str>) -> CliResult<Report> {
    if let Some(f) = fault {
        if !IDENTITIES.contains(&f) {
            return Err(CliError::Usage(format!("unknown identity '{f}'")));
        }
    }
    let mut doc = CsvDoc::new("verify", cfg, &["identity", "value", "target", "residual", "tolerance", "status"]);
    let mut summary = vec![format!("{:<22} {:>16} {:>16} {:>10} {:>8}  status", "identity", "value", "target", "residual", "tol")];
    let mut failed = Vec::new();
    for mut r in rows()? {
        if fault == Some(r.name) {
            r.value += 1.0;
        }
        let res = (r.residual)(r.value, r.target);
        let ok = res <= r.tolerance;
        let status = if ok { "pass" } else { "FAIL" };
        doc.row([
            r.name.to_string(),
            num(Some(r.value)),
            num(Some(r.target)),
            num(Some(res)),
            num(Some(r.tolerance)),
            status.to_string(),
        ]);
        summary.push(format!(
            "{:<22} {:>16} {:>16} {:>10.2e} {:>8.0e}  {status}",
            r.name,
            short(r.value),
            short(r.target),
            res,
            r.tolerance
        ));
        if !ok {
            failed.push(r.name);
        }
    }
    let failure = (!failed.is_empty()).then(|| CliError::Numerical(format!("identity failed: {}", failed.join(", "))));
    Ok(Report { command: "verify".into(), doc, summary, failure })
}

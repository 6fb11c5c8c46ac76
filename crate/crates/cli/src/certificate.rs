//! `certificate`: barrier certificate constants and the τ table.

use dyadic_kinetics::closed_forms::gaussian_minus_steady;
use dyadic_kinetics::evolution::{barrier_certificate, tau};
use dyadic_kinetics::fourier_grid::{sample_real, Taylor};
use dyadic_kinetics::metrics::norm_k;
use dyadic_kinetics::Error;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, CsvDoc};
use crate::Report;

pub fn run(cfg: &RunConfig) -> CliResult<Report> {
    let cc = &cfg.certificate;
    let c_k = match cc.c_k {
        Some(v) => v,
        None => {
            let grid = cfg.dyadic_grid()?;
            norm_k(&sample_real(&grid, gaussian_minus_steady, Taylor::ZERO)?, cc.k)?
        }
    };
    let cert = match barrier_certificate(cc.beta, cc.c, c_k, cc.k) {
        Ok(c) => c,
        Err(Error::CertificateFailed(why)) => {
            return Err(CliError::Numerical(format!("certificate construction failed: {why}")));
        }
        Err(e) => return Err(e.into()),
    };

    let fields: Vec<(&str, String)> = vec![
        ("beta", format!("{}", cert.beta)),
        ("c", format!("{}", cert.c)),
        ("C_k", format!("{}", cert.c_k)),
        ("k", format!("{}", cert.k)),
        ("alpha", format!("{}", cert.alpha)),
        ("delta", format!("{}", cert.delta)),
        ("r_alpha_k", format!("{}", cert.r_alpha_k)),
        ("t0", format!("{:.7}", cert.t0)),
        ("t_star", format!("{}", cert.t_star)),
        ("ln_alpha_prime", format!("{}", cert.ln_alpha_prime)),
        ("tau", format!("{}", cert.tau)),
        ("j", format!("{}", cert.j)),
        ("log2_c0", format!("{}", cert.log2_c0)),
    ];
    let mut doc = CsvDoc::new("certificate", cfg, &["beta_prime", "tau"]);
    let mut summary = vec!["certificate constructed".to_string()];
    for (name, v) in &fields {
        doc.comment(format!("{name} = {v}"));
        summary.push(format!("{name} = {v}"));
    }
    // τ(δ, α, β') as β' halves.
    for i in 1..=cc.halvings {
        let bp = 2f64.powi(-(i as i32));
        doc.row([num(Some(bp)), num(Some(tau(cert.delta, cert.alpha, bp)))]);
    }
    Ok(Report { command: "certificate".into(), doc, summary, failure: None })
}

//! `dyadic`: experiment runner for the dyadic-kinetics library.
//!
//! Exit status: 0 when every asserted margin holds, 2 for usage or configuration errors,
//! 3 when a numerical assertion fails.

mod certificate;
mod config;
mod error;
mod gap;
mod output;
mod rates;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult};
use output::CsvDoc;

#[derive(Parser, Debug)]
#[command(name = "dyadic", version, about = "Fourier-side relaxation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; relative paths go under $DYADIC_OUTPUT_DIR when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// No summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nonlinear run with sampled observables.
    Simulate,
    /// Run of the linearised flow.
    Linear,
    /// Fitted decay rates against the predicted rates.
    Rates {
        /// Comma-separated k values, replacing `rates.k`.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        k: Option<Vec<f64>>,
    },
    /// Barrier certificate report.
    Certificate {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long = "c-k")]
        c_k: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
    },
    /// Weighted L¹ gap estimate and dissipativity ensemble.
    Gap {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Closed-form identity suite.
    Verify {
        /// Perturb the named identity (test hook).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

/// What a command leaves behind: a CSV, a summary and possibly a failed assertion.
pub struct Report {
    pub command: String,
    pub doc: CsvDoc,
    pub summary: Vec<String>,
    pub failure: Option<CliError>,
}

fn load(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match &cli.command {
        Command::Rates { k: Some(k) } => cfg.rates.k = k.clone(),
        Command::Certificate { beta, c, c_k, k } => {
            let cc = &mut cfg.certificate;
            cc.beta = beta.unwrap_or(cc.beta);
            cc.c = c.unwrap_or(cc.c);
            cc.c_k = c_k.or(cc.c_k);
            cc.k = k.unwrap_or(cc.k);
        }
        Command::Gap { a, r } => {
            cfg.gap.a = a.unwrap_or(cfg.gap.a);
            cfg.gap.r = r.unwrap_or(cfg.gap.r);
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = load(cli)?;
    let report = match &cli.command {
        Command::Simulate => simulate::run(&cfg, "nonlinear")?,
        Command::Linear => simulate::run(&cfg, "linear")?,
        Command::Rates { .. } => rates::run(&cfg)?,
        Command::Certificate { .. } => certificate::run(&cfg)?,
        Command::Gap { .. } => gap::run(&cfg)?,
        Command::Verify { inject_fault } => verify::run(&cfg, inject_fault.as_deref())?,
    };
    let path = output::resolve_path(cli.out.as_deref(), &report.command);
    let mut doc = report.doc;
    doc.comment(format!("seed = {}", cfg.seed));
    doc.write_atomic(&path)?;
    if !cli.quiet {
        for line in &report.summary {
            println!("{line}");
        }
        println!("wrote {}", path.display());
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

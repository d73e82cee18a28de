//! `mislab` command-line front end.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a report's
//! asserted invariants do not hold (the report is still written).

mod commands;
mod config;
mod report;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Parser)]
#[command(name = "mislab", version, about = "Cost analysis of naive maximum-independent-set search on G(n,p)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    cfg: RunConfig,
}

#[derive(Subcommand)]
pub enum Command {
    /// Exact mean cost mu_n.
    ExactMean,
    /// mu_n by recurrence, alternating closed form and positive form.
    ClosedForms,
    /// Expected number of independent sets, two ways.
    Jn,
    /// Variance and standardized central moments of the idealized cost.
    Moments,
    /// Mean nu_n of the uniform-split cost.
    Nu,
    /// Moments zeta_m of the uniform-split limit law.
    Zeta,
    /// Leading-order estimate of mu_n against the exact value.
    Asymptotic,
    /// Poisson-Charlier corrected estimates of mu_n.
    Charlier {
        #[arg(long, default_value_t = 2)]
        terms: u32,
    },
    /// Alternative saddle-point expansion of the Poisson transform.
    AltExpansion {
        /// Centre the expansion at rho = N or rho = N + 1.
        #[arg(long, default_value = "n", value_parser = ["n", "n+1"])]
        centre: String,
    },
    /// Monte Carlo campaign for X, Y or Z.
    Simulate {
        #[arg(long, default_value = "Y")]
        kind: String,
    },
    /// Trend of the idealized cost toward normality.
    Normality {
        #[arg(long, default_value_t = mislab::stats::DEFAULT_KS_THRESHOLD)]
        ks_threshold: f64,
        /// Normal samples drawn to calibrate the KS threshold.
        #[arg(long, default_value_t = 200)]
        calibration_trials: usize,
    },
    /// Scaled moments of the uniform-split cost against zeta_m.
    ZLimit,
    /// mu_n, Poisson transform and leading estimate side by side.
    Compare,
    /// Build or load a cached moment table.
    Cache,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ExactMean => "exact-mean",
            Command::ClosedForms => "closed-forms",
            Command::Jn => "jn",
            Command::Moments => "moments",
            Command::Nu => "nu",
            Command::Zeta => "zeta",
            Command::Asymptotic => "asymptotic",
            Command::Charlier { .. } => "charlier",
            Command::AltExpansion { .. } => "alt-expansion",
            Command::Simulate { .. } => "simulate",
            Command::Normality { .. } => "normality",
            Command::ZLimit => "z-limit",
            Command::Compare => "compare",
            Command::Cache => "cache",
        }
    }
}

fn emit(cfg: &RunConfig, report: &report::Report) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    match cfg.format {
        Format::Csv => report.write_csv(&mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &report.to_json())?;
            buf.push(b'\n');
        }
    }
    match &cfg.output {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = commands::run(&cli.command, &cli.cfg).and_then(|mut report| {
        report.header = cli.cfg.header(cli.command.name());
        emit(&cli.cfg, &report)?;
        Ok(report)
    });
    match result {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("mislab: check failed: {}", c.name);
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("mislab: {e:#}");
            let invariant =
                matches!(e.downcast_ref::<mislab::Error>(), Some(mislab::Error::CancellationCheck { .. } | mislab::Error::NoConvergence(_)));
            ExitCode::from(if invariant { 2 } else { 1 })
        }
    }
}

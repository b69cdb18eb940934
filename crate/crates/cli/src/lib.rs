//! Command-line driver for `wdvv-core`: configuration parsing, residual
//! reports and point-cloud export.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::RunOptions;
use crate::config::Job;
pub use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wdvv", version, about = "WDVV residual checks and k-potential submanifold realization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// JSON job configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Report file (check, hydro) or output directory (realize).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for sampled points; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-check threshold override, e.g. `wdvv=1e-12`. Repeatable.
    #[arg(long = "threshold", value_parser = parse_threshold)]
    pub thresholds: Vec<(String, f64)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// WDVV, Gauss, Ricci, Codazzi, curvature and spectral residuals.
    Check(JobArgs),
    /// Integrate the frame over the grid and export the point cloud.
    Realize {
        #[command(flatten)]
        job: JobArgs,
        /// Write coordinates in which the ambient metric is diagonal ±1.
        #[arg(long)]
        diagonalize: bool,
    },
    /// Three-dimensional reduction: equation for f and the hydrodynamic system.
    Hydro(JobArgs),
    /// Admissible signatures of the ambient space.
    Signatures {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 's')]
        s: usize,
        #[arg(short = 'k')]
        k: usize,
        #[arg(short = 'p', default_value_t = 0)]
        p: usize,
    },
}

fn parse_threshold(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = value.parse().map_err(|e| format!("bad threshold {value:?}: {e}"))?;
    Ok((name.to_string(), v))
}

/// What a successful run produced.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub pass: bool,
}

fn load(args: &JobArgs) -> Result<Job, CliError> {
    let text = fs::read_to_string(&args.config)?;
    Job::from_json(&text)
}

fn options(args: &JobArgs, diagonalize: bool) -> RunOptions {
    RunOptions {
        seed: args.seed,
        thresholds: args.thresholds.clone(),
        diagonalize,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let report = match &cli.command {
        Command::Check(args) => {
            let report = commands::cmd_check(&load(args)?, &options(args, false))?;
            if let Some(out) = &args.out {
                fs::write(out, report.to_json())?;
            }
            report
        }
        Command::Hydro(args) => {
            let report = commands::cmd_hydro(&load(args)?, &options(args, false))?;
            if let Some(out) = &args.out {
                fs::write(out, report.to_json())?;
            }
            report
        }
        Command::Realize { job, diagonalize } => {
            let out = job.out.as_ref().ok_or_else(|| CliError::Config {
                path: "--out".into(),
                message: "realize needs an output directory".into(),
            })?;
            commands::cmd_realize(&load(job)?, &options(job, *diagonalize), out)?
        }
        Command::Signatures { n, s, k, p } => {
            let text = commands::cmd_signatures(*n, *s, *k, *p)?;
            return Ok(Outcome {
                stdout: format!("{text}\n"),
                pass: true,
            });
        }
    };
    Ok(Outcome {
        stdout: report.to_json(),
        pass: report.pass,
    })
}

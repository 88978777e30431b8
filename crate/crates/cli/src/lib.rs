//! Command-line experiment runner: parses an experiment config, runs one of
//! the studies and writes plot-ready CSV.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Study;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cobeam", version, about = "Cooperative 3D beamforming experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Small-cell study, by default over the micro-cell radius.
    SmallcellSweep(CommonArgs),
    /// Cell-free study, by default over the number of users.
    CellfreeSweep(CommonArgs),
    /// Small-cell against cell-free at matched user counts, by default over K.
    CompareArch(CommonArgs),
    /// Precoders side by side, by default with and without position errors.
    PrecoderCompare(CommonArgs),
    /// Uncoded BER, by default over K.
    Ber(CommonArgs),
    /// Closed-form capacity against quadrature on a (k_s, c_sigma) grid.
    TheoryTable(CommonArgs),
    /// Closed-form identities against their numerical oracles.
    Validate(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Experiment config (JSON); omitted fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a config value, `KEY=VALUE` with a dotted KEY; repeatable.
    #[arg(long = "set", value_name = "K=V")]
    pub set: Vec<String>,
    /// Leave out the runtime_s column.
    #[arg(long)]
    pub no_runtime_col: bool,
}

fn load(args: &CommonArgs) -> Result<config::ExperimentConfig, CliError> {
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("master_seed={seed}"));
    }
    if let Some(n) = args.trials {
        overrides.push(format!("n_trials={n}"));
    }
    config::load(args.config.as_deref(), &overrides)
}

fn sink(args: &CommonArgs, cfg: &config::ExperimentConfig) -> Result<Box<dyn Write>, CliError> {
    match args.out.as_ref().or(cfg.output.as_ref()) {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn study(study: Study, args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let rows = commands::run_study(study, &cfg)?;
    let out = sink(args, &cfg)?;
    output::write_sweep(out, &rows, !args.no_runtime_col)
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SmallcellSweep(a) => study(Study::SmallCellSweep, &a),
        Command::CellfreeSweep(a) => study(Study::CellFreeSweep, &a),
        Command::CompareArch(a) => study(Study::CompareArch, &a),
        Command::PrecoderCompare(a) => study(Study::PrecoderCompare, &a),
        Command::Ber(a) => study(Study::Ber, &a),
        Command::TheoryTable(a) => {
            let cfg = load(&a)?;
            let rows = commands::theory_table(&cfg)?;
            output::write_theory(sink(&a, &cfg)?, &rows)
        }
        Command::Validate(a) => {
            let cfg = load(&a)?;
            let checks = validate::run_all();
            let table = validate::format_table(&checks);
            match a.out.as_ref().or(cfg.output.as_ref()) {
                Some(p) => std::fs::write(p, &table)?,
                None => print!("{table}"),
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(CliError::Runtime("validation checks failed".into()))
            }
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

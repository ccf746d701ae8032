//! Command line interface.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
//! Progress goes to stderr, tables to stdout.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Overrides};
use crate::pipeline::{self, PipelineError};
use crate::report::log::ParseMode;
use crate::report::manifest::{audit, Verdict, MANIFEST_FILE};
use crate::simulate;

#[derive(Debug, Parser)]
#[command(name = "timefair", version, about = "Wall-clock-budgeted, restart-fair optimizer benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute an experiment config and write logs, curves and the manifest.
    Run(RunArgs),
    /// Recompute tables and curves from the logs of an experiment directory.
    Analyze(AnalyzeArgs),
    /// Audit the reproducibility manifest of an experiment directory.
    Report(ReportArgs),
    /// Run the built-in virtual-time PSO scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed; every run seed is re-derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run independent repetitions concurrently (virtual clock only).
    #[arg(long)]
    pub parallel: bool,
    /// Tuning seconds to amortize for a solver, as `<solver>=<seconds>`.
    #[arg(long, value_parser = parse_amortize)]
    pub amortize: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Experiment directory.
    pub dir: PathBuf,
    /// Abort on the first malformed log line instead of skipping it.
    #[arg(long)]
    pub strict_logs: bool,
    #[arg(long, value_parser = parse_amortize)]
    pub amortize: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub dir: PathBuf,
    #[arg(long)]
    pub strict_logs: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Also write a full experiment directory here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallel: bool,
}

fn parse_amortize(s: &str) -> Result<(String, f64), String> {
    let (solver, secs) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <solver>=<seconds>, got `{s}`"))?;
    if solver.is_empty() {
        return Err("solver id must not be empty".into());
    }
    let secs: f64 = secs
        .parse()
        .map_err(|_| format!("invalid seconds `{secs}`"))?;
    if !(secs.is_finite() && secs >= 0.0) {
        return Err(format!("seconds must be finite and >= 0, got {secs}"));
    }
    Ok((solver.to_string(), secs))
}

fn fail(err: &mut dyn Write, e: PipelineError) -> i32 {
    let _ = writeln!(err, "error: {e}");
    e.exit_code()
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match ExperimentConfig::load(&args.config).and_then(|c| {
        c.apply(&Overrides {
            seed: args.seed,
            output_dir: args.out.clone(),
            parallel: args.parallel,
            amortize: args.amortize.clone(),
        })
    }) {
        Ok(c) => c,
        Err(e) => return fail(err, e.into()),
    };
    let Some(dir) = cfg.output_dir.clone() else {
        let _ = writeln!(err, "error: no output directory: pass --out or set output_dir");
        return 2;
    };
    match pipeline::run_experiment(&cfg, &dir, err) {
        Ok((_, analysis)) => {
            let _ = write!(out, "{}", pipeline::summary_table(&analysis));
            let _ = writeln!(err, "experiment written to {}", dir.display());
            0
        }
        Err(e) => fail(err, e),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mode = if args.strict_logs {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    };
    match pipeline::analyze_dir(&args.dir, mode, &args.amortize, err) {
        Ok((_, analysis)) => {
            let _ = write!(out, "{}", pipeline::summary_table(&analysis));
            0
        }
        Err(e) => fail(err, e),
    }
}

pub fn audit_dir(dir: &Path) -> Result<crate::report::Audit, PipelineError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|source| PipelineError::Io {
        path: path.clone(),
        source,
    })?;
    let value = serde_json::from_str(&text).map_err(|e| PipelineError::Json {
        path,
        message: e.to_string(),
    })?;
    Ok(audit(&value, Some(dir)))
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if !args.dir.join(MANIFEST_FILE).exists() {
        let _ = writeln!(err, "no manifest found; rebuilding it from the logs");
        let mode = if args.strict_logs {
            ParseMode::Strict
        } else {
            ParseMode::Lenient
        };
        if let Err(e) = pipeline::analyze_dir(&args.dir, mode, &[], err) {
            return fail(err, e);
        }
    }
    match audit_dir(&args.dir) {
        Ok(a) => {
            let _ = writeln!(out, "{a}");
            if a.verdict() == Verdict::Fail {
                1
            } else {
                0
            }
        }
        Err(e) => fail(err, e),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match simulate::scenario_config().apply(&Overrides {
        seed: args.seed,
        parallel: args.parallel,
        ..Overrides::default()
    }) {
        Ok(c) => c,
        Err(e) => return fail(err, e.into()),
    };
    let result = match &args.out {
        Some(dir) => pipeline::run_experiment(&cfg, dir, err),
        None => pipeline::execute(&cfg.effective()).and_then(|exec| {
            let table = crate::analysis::RunTable::new(exec.records().cloned());
            let analysis = crate::analysis::analyze(
                &exec.plan,
                &table,
                &pipeline::analysis_options(&cfg.effective()),
            )?;
            Ok((exec, analysis))
        }),
    };
    match result {
        Ok((exec, analysis)) => {
            let rows = simulate::scenario_rows(&exec);
            let _ = writeln!(
                out,
                "scenario: {}, T = {} s, R = {}, virtual clock, seed {}",
                simulate::INSTANCE,
                simulate::WALL_TIME_LIMIT,
                cfg.repetitions,
                cfg.master_seed
            );
            let _ = write!(out, "{}", simulate::format_rows(&rows));
            let counts: Vec<String> = rows
                .iter()
                .map(|r| format!("{} {}", r.algorithm, r.runs_max))
                .collect();
            let _ = writeln!(out, "restart counts: {}", counts.join(", "));
            let _ = writeln!(out);
            let _ = write!(out, "{}", pipeline::summary_table(&analysis));
            0
        }
        Err(e) => fail(err, e),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match &cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Analyze(a) => cmd_analyze(a, out, err),
        Command::Report(a) => cmd_report(a, out, err),
        Command::Simulate(a) => cmd_simulate(a, out, err),
    }
}

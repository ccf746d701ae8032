//! End-to-end experiment flow shared by the CLI subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{self, Analysis, AnalysisError, AnalysisOptions, RunTable, COST_FLOOR_SECONDS};
use crate::config::{ConfigError, ExperimentConfig, Overrides, EFFECTIVE_CONFIG_FILE};
use crate::metrics::RankSumMethod;
use crate::protocol::{run_plan, ExperimentPlan, ProtocolError, RepetitionOutcome};
use crate::report::curves::{self, format_f64, CsvError};
use crate::report::environment::{build_info, probe, Probe};
use crate::report::log::{read_run_log_file, write_run_log_file, LogError, ParseMode};
use crate::report::manifest::{
    budget_section, digests, file_sha256, restart_section, statistics_section, targets_section,
    ArtifactsSection, ExecutionStats, Manifest, MetricsSection, Section, TuningSection,
    MANIFEST_FILE, MANIFEST_FORMAT,
};
use crate::report::log_path;
use crate::types::RunRecord;

pub const ERT_TABLE_FILE: &str = "ert_table.csv";
pub const RANK_TESTS_FILE: &str = "rank_tests.csv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
}

impl PipelineError {
    /// 2 for configuration problems, 1 for everything that failed at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

fn create(path: &Path) -> Result<fs::File, PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::File::create(path).map_err(io_err(path))
}

pub fn analysis_options(cfg: &ExperimentConfig) -> AnalysisOptions {
    AnalysisOptions {
        grid_points: cfg.metrics.grid_points,
        grid_min_fraction: cfg.metrics.grid_min_fraction,
        bootstrap: cfg.metrics.bootstrap(cfg.master_seed),
        all_failed: cfg.metrics.all_failed,
        tuning_seconds: cfg.tuning_seconds(),
    }
}

/// Result of executing a plan.
pub struct Execution {
    pub plan: ExperimentPlan,
    pub outcomes: Vec<RepetitionOutcome>,
    pub stats: ExecutionStats,
}

impl Execution {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.outcomes.iter().flat_map(|o| o.records.iter())
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Execution, PipelineError> {
    let plan = cfg.plan()?;
    let outcomes = run_plan::<f64>(&plan, cfg.parallel)?;
    let stats = ExecutionStats::from_outcomes(&outcomes, &plan.clock, cfg.parallel);
    Ok(Execution {
        plan,
        outcomes,
        stats,
    })
}

/// Writes one JSONL file per (algorithm, instance) and returns their relative paths.
pub fn write_logs(dir: &Path, exec: &Execution) -> Result<Vec<String>, PipelineError> {
    let mut paths = Vec::new();
    for a in &exec.plan.algorithms {
        for inst in &exec.plan.instances {
            let rel = log_path(&a.id, inst);
            let records = exec
                .outcomes
                .iter()
                .filter(|o| o.algorithm_id == a.id && &o.instance_id == inst)
                .flat_map(|o| o.records.iter());
            write_run_log_file(&dir.join(&rel), records)?;
            paths.push(rel);
        }
    }
    Ok(paths)
}

/// Problems met while reading logs leniently.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct LogHealth {
    pub skipped_lines: usize,
    pub rejected_runs: usize,
    pub aborted: Vec<String>,
}

pub fn read_logs(
    dir: &Path,
    plan: &ExperimentPlan,
    mode: ParseMode,
) -> Result<(Vec<RunRecord>, Vec<String>, LogHealth), PipelineError> {
    let mut records = Vec::new();
    let mut paths = Vec::new();
    let mut health = LogHealth::default();
    for a in &plan.algorithms {
        for inst in &plan.instances {
            let rel = log_path(&a.id, inst);
            let parsed = read_run_log_file(&dir.join(&rel), mode).map_err(|e| match e {
                LogError::Io(source) => PipelineError::Io {
                    path: dir.join(&rel),
                    source,
                },
                other => PipelineError::Json {
                    path: dir.join(&rel),
                    message: other.to_string(),
                },
            })?;
            health.skipped_lines += parsed.skipped_lines.len();
            health.rejected_runs += parsed.rejected_runs.len();
            if let Some(r) = parsed.aborted {
                health.aborted.push(format!("{rel}: {r}"));
            }
            records.extend(parsed.records);
            paths.push(rel);
        }
    }
    Ok((records, paths, health))
}

fn write_rank_tests(path: &Path, a: &Analysis) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let header = [
        "instance", "solver_a", "solver_b", "n_a", "n_b", "statistic", "p_value", "method",
        "degenerate",
    ];
    w.write_record(header).map_err(CsvError::from)?;
    for t in &a.rank_tests {
        let method = match t.result.method {
            RankSumMethod::Exact => "exact",
            RankSumMethod::NormalApprox => "normal_approx",
        };
        w.write_record([
            t.instance.clone(),
            t.solver_a.clone(),
            t.solver_b.clone(),
            t.n_a.to_string(),
            t.n_b.to_string(),
            format_f64(t.result.statistic),
            format_f64(t.result.p_value),
            method.to_string(),
            t.result.degenerate.to_string(),
        ])
        .map_err(CsvError::from)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Writes tables and curves; returns paths relative to `dir`.
pub fn write_outputs(dir: &Path, a: &Analysis) -> Result<Vec<String>, PipelineError> {
    let mut produced = Vec::new();
    curves::write_ert_csv(create(&dir.join(ERT_TABLE_FILE))?, &a.ert_rows)?;
    produced.push(ERT_TABLE_FILE.to_string());
    for (solver, curve) in &a.ecdf {
        let rel = format!("curves/ecdf_{solver}.csv");
        curves::write_ecdf_csv(create(&dir.join(&rel))?, curve)?;
        produced.push(rel);
    }
    for (inst, set) in &a.medians {
        let rel = format!("curves/median_{inst}.csv");
        curves::write_median_csv(create(&dir.join(&rel))?, set)?;
        produced.push(rel);
    }
    for p in &a.profiles {
        let rel = format!("curves/profile_q{}.csv", p.target_index);
        curves::write_profile_csv(create(&dir.join(&rel))?, &p.profile.curves)?;
        produced.push(rel);
    }
    write_rank_tests(&dir.join(RANK_TESTS_FILE), a)?;
    produced.push(RANK_TESTS_FILE.to_string());
    Ok(produced)
}

fn metrics_settings(cfg: &ExperimentConfig, a: &Analysis) -> Value {
    json!({
        "ert": {
            "definition": "sum over repetitions of min(t_i, T) divided by the number of successful repetitions; +inf without successes",
            "run_unit": "one repetition's restart sequence; t_i is the cumulative time to the first hit",
        },
        "ecdf": {
            "pairs": "(repetition, instance, target)",
            "grid": "log-spaced",
            "grid_points": cfg.metrics.grid_points,
            "grid_min_fraction": cfg.metrics.grid_min_fraction,
        },
        "median_trajectory": {
            "value": "best-so-far over the restart sequence at cumulative time; empty before the first evaluation",
        },
        "profiles": {
            "cost": "ERT seconds per target",
            "cost_floor_seconds": COST_FLOOR_SECONDS,
            "all_failed": cfg.metrics.all_failed,
            "per_target": a.profiles.iter().map(|p| json!({
                "target_index": p.target_index,
                "instances_used": p.profile.instances_used,
                "excluded_rows": p.profile.excluded_rows,
            })).collect::<Vec<_>>(),
        },
    })
}

/// Writes curves, tables and the manifest for `records`.
pub fn finish_experiment(
    dir: &Path,
    cfg: &ExperimentConfig,
    plan: &ExperimentPlan,
    records: Vec<RunRecord>,
    log_paths: &[String],
    execution: Probe<ExecutionStats>,
) -> Result<Analysis, PipelineError> {
    let table = RunTable::new(records);
    let analysis = analysis::analyze(plan, &table, &analysis_options(cfg))?;
    let produced = write_outputs(dir, &analysis)?;
    let all: Vec<RunRecord> = table.records().cloned().collect();

    let bootstrap = cfg.metrics.bootstrap(cfg.master_seed);
    let statistics = statistics_section(
        plan,
        json!({
            "method": "percentile bootstrap over repetitions",
            "samples": bootstrap.samples,
            "confidence": bootstrap.confidence,
            "seed": bootstrap.seed,
        }),
        json!({
            "name": "Mann-Whitney U, two-sided, on best-of-restarts per repetition",
            "exact_up_to_total_n": 20,
            "file": RANK_TESTS_FILE,
            "skipped_pairs": analysis.skipped_tests,
        }),
    );
    let tuning = match &cfg.tuning {
        Some(t) => Section::Present(TuningSection {
            method: t.method.clone(),
            total_seconds: t.seconds.values().sum(),
            per_solver: t.seconds.clone(),
            amortization: t.amortization.clone(),
        }),
        None => Section::not_applicable("no tuning performed"),
    };
    let config_hash = file_sha256(&dir.join(EFFECTIVE_CONFIG_FILE))
        .map_err(io_err(&dir.join(EFFECTIVE_CONFIG_FILE)))?;
    let build = build_info();
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        budget: Section::Present(budget_section(plan, execution)),
        restart_policy: Section::Present(restart_section(plan, &all)),
        targets: Section::Present(targets_section(plan, analysis.thresholds.clone())),
        metrics: Section::Present(MetricsSection {
            produced: produced.clone(),
            settings: metrics_settings(cfg, &analysis),
        }),
        statistics: Section::Present(statistics),
        environment: Section::Present(probe(&plan.clock)),
        tuning,
        artifacts: Section::Present(ArtifactsSection {
            config_file: EFFECTIVE_CONFIG_FILE.to_string(),
            config_hash: format!("sha256:{config_hash}"),
            code_version: json!({
                "package": build.package_version,
                "git_revision": build.git_revision,
            }),
            logs: digests(dir, log_paths).map_err(io_err(dir))?,
            outputs: digests(dir, &produced).map_err(io_err(dir))?,
            replication: "`timefair run --config effective_config.toml` replays the logs; `timefair analyze <dir>` regenerates every table and curve",
        }),
    };
    write_file(&dir.join(MANIFEST_FILE), manifest.to_json_pretty().as_bytes())?;
    Ok(analysis)
}

pub fn write_effective_config(dir: &Path, cfg: &ExperimentConfig) -> Result<(), PipelineError> {
    write_file(
        &dir.join(EFFECTIVE_CONFIG_FILE),
        cfg.effective().to_toml()?.as_bytes(),
    )
}

/// Executes `cfg` and writes the complete experiment directory.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    dir: &Path,
    progress: &mut dyn Write,
) -> Result<(Execution, Analysis), PipelineError> {
    let cfg = cfg.effective();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_effective_config(dir, &cfg)?;
    let _ = writeln!(
        progress,
        "running {} algorithm(s) x {} instance(s) x {} repetition(s), T = {} s ({} clock)",
        cfg.algorithms.len(),
        cfg.instances.len(),
        cfg.repetitions,
        cfg.budget.wall_time_limit,
        cfg.clock.label()
    );
    let exec = execute(&cfg)?;
    let logs = write_logs(dir, &exec)?;
    let _ = writeln!(progress, "wrote {} run log(s)", logs.len());
    let records: Vec<RunRecord> = exec.records().cloned().collect();
    let analysis = finish_experiment(
        dir,
        &cfg,
        &exec.plan,
        records,
        &logs,
        Probe::Known(exec.stats.clone()),
    )?;
    Ok((exec, analysis))
}

fn recorded_execution(dir: &Path) -> Probe<ExecutionStats> {
    let reason = "no execution statistics recorded; manifest rebuilt from logs";
    let Ok(text) = fs::read_to_string(dir.join(MANIFEST_FILE)) else {
        return Probe::unavailable(reason);
    };
    serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| serde_json::from_value(v["budget"]["execution"].clone()).ok())
        .map_or_else(|| Probe::unavailable(reason), Probe::Known)
}

/// Re-reads the logs in `dir` and regenerates tables, curves and the manifest.
pub fn analyze_dir(
    dir: &Path,
    mode: ParseMode,
    amortize: &[(String, f64)],
    progress: &mut dyn Write,
) -> Result<(ExperimentConfig, Analysis), PipelineError> {
    let cfg = ExperimentConfig::load(&dir.join(EFFECTIVE_CONFIG_FILE))?.apply(&Overrides {
        amortize: amortize.to_vec(),
        ..Overrides::default()
    })?;
    let plan = cfg.plan()?;
    let (records, logs, health) = read_logs(dir, &plan, mode)?;
    if health != LogHealth::default() {
        let _ = writeln!(
            progress,
            "log problems: {} malformed line(s) skipped, {} run(s) rejected",
            health.skipped_lines, health.rejected_runs
        );
        for a in &health.aborted {
            let _ = writeln!(progress, "aborted log: {a}");
        }
    }
    let execution = recorded_execution(dir);
    let analysis = finish_experiment(dir, &cfg, &plan, records, &logs, execution)?;
    Ok((cfg, analysis))
}

/// Per (solver, instance, target) summary, one line each.
pub fn summary_table(a: &Analysis) -> String {
    let mut out = format!(
        "{:<16} {:<18} {:>12} {:>12} {:>14}\n",
        "solver", "instance", "target", "ERT[s]", "success rate"
    );
    for r in &a.ert_rows {
        out.push_str(&format!(
            "{:<16} {:<18} {:>12} {:>12} {:>14}\n",
            r.solver,
            r.instance,
            format!("{}", r.result.target),
            if r.result.ert.is_finite() {
                format!("{:.4}", r.result.ert)
            } else {
                "inf".into()
            },
            format!(
                "{:.2} ({}/{})",
                r.result.success_rate, r.result.successes, r.result.runs
            ),
        ));
    }
    out
}

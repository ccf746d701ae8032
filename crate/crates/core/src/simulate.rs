//! Built-in virtual-time scenario: a cheap PSO against an expensive variant.
//!
//! Both algorithms run the same swarm for 250 iterations. The baseline costs
//! 0.04 s per iteration (40 evaluations at 1 ms) and so finishes a run in
//! 10 s; the heavy variant adds 0.16 s of synthetic overhead per iteration and
//! needs 50 s. With `T = 50` the baseline fits five restarts, the variant one.

use serde::Serialize;

use crate::clock::ClockMode;
use crate::config::{BudgetConfig, ExperimentConfig, MetricsConfig, TargetsConfig};
use crate::metrics::median_of;
use crate::optimizers::{AlgorithmKind, AlgorithmSpec, PsoParams};
use crate::pipeline::Execution;
use crate::protocol::best_of_restarts;
use crate::types::{TargetKind, Termination};

pub const BASELINE_ID: &str = "pso";
pub const HEAVY_ID: &str = "pso-heavy";
pub const INSTANCE: &str = "rastrigin-d10";
pub const SCENARIO_SEED: u64 = 20_240_917;
pub const WALL_TIME_LIMIT: f64 = 50.0;
pub const REPETITIONS: u32 = 20;
/// Absolute thresholds; 5.0 is the scenario's reference quality, 1e-8 is
/// effectively the optimum and keeps runs from stopping early.
pub const TARGETS: [f64; 5] = [50.0, 20.0, 10.0, 5.0, 1e-8];

pub fn scenario_config() -> ExperimentConfig {
    let pso = |id: &str, overhead: Option<f64>| AlgorithmSpec {
        id: id.to_string(),
        kind: AlgorithmKind::Pso,
        pso: Some(PsoParams::default()),
        max_iterations: Some(250),
        stagnation: None,
        overhead_per_iteration: overhead,
    };
    ExperimentConfig {
        output_dir: None,
        master_seed: SCENARIO_SEED,
        repetitions: REPETITIONS,
        parallel: false,
        instances: vec![INSTANCE.to_string()],
        budget: BudgetConfig {
            wall_time_limit: WALL_TIME_LIMIT,
            eval_cap: None,
        },
        clock: ClockMode::Virtual {
            cost_per_eval: 0.001,
        },
        targets: TargetsConfig {
            kind: TargetKind::Absolute,
            values: TARGETS.to_vec(),
        },
        metrics: MetricsConfig::default(),
        tuning: None,
        algorithms: vec![pso(BASELINE_ID, None), pso(HEAVY_ID, Some(0.16))],
    }
}

/// Per-algorithm figures of the scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub algorithm: String,
    /// Runs per repetition (equal across repetitions in this scenario).
    pub runs_min: usize,
    pub runs_max: usize,
    pub completed_runs_mean: f64,
    pub mean_run_seconds: f64,
    pub median_best_of_restarts: f64,
    pub median_first_run: f64,
}

pub fn scenario_rows(exec: &Execution) -> Vec<ScenarioRow> {
    exec.plan
        .algorithms
        .iter()
        .map(|a| {
            let reps: Vec<_> = exec
                .outcomes
                .iter()
                .filter(|o| o.algorithm_id == a.id)
                .collect();
            let counts: Vec<usize> = reps.iter().map(|o| o.records.len()).collect();
            let completed: usize = reps
                .iter()
                .flat_map(|o| &o.records)
                .filter(|r| r.termination != Termination::BudgetExhausted)
                .count();
            let runs: Vec<_> = reps.iter().flat_map(|o| &o.records).collect();
            let mut best: Vec<f64> = reps
                .iter()
                .map(|o| best_of_restarts(&o.records).map_or(f64::INFINITY, |b| b.value))
                .collect();
            let mut first: Vec<f64> = reps
                .iter()
                .map(|o| {
                    o.records
                        .first()
                        .and_then(|r| r.final_best())
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            ScenarioRow {
                algorithm: a.id.clone(),
                runs_min: counts.iter().copied().min().unwrap_or(0),
                runs_max: counts.iter().copied().max().unwrap_or(0),
                completed_runs_mean: completed as f64 / reps.len().max(1) as f64,
                mean_run_seconds: runs.iter().map(|r| r.time_used).sum::<f64>()
                    / runs.len().max(1) as f64,
                median_best_of_restarts: median_of(&mut best),
                median_first_run: median_of(&mut first),
            }
        })
        .collect()
}

pub fn format_rows(rows: &[ScenarioRow]) -> String {
    let mut out = format!(
        "{:<12} {:>9} {:>11} {:>12} {:>16} {:>16}\n",
        "algorithm", "runs/rep", "completed", "run cost[s]", "median best-of-R", "median 1st run"
    );
    for r in rows {
        let runs = if r.runs_min == r.runs_max {
            r.runs_min.to_string()
        } else {
            format!("{}-{}", r.runs_min, r.runs_max)
        };
        out.push_str(&format!(
            "{:<12} {:>9} {:>11.2} {:>12.2} {:>16.6} {:>16.6}\n",
            r.algorithm,
            runs,
            r.completed_runs_mean,
            r.mean_run_seconds,
            r.median_best_of_restarts,
            r.median_first_run
        ));
    }
    out
}

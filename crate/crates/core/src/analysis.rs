//! Turns run records into the tables and curves of an experiment report.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::metrics::{
    amortize_tuning, anytime_ecdf, ert, log_time_grid, median_trajectory, performance_profile,
    rank_sum_test, repetition_time_to_target, AllFailedPolicy, BootstrapSettings, EcdfCurve,
    EcdfGroup, MedianCurve, MetricsError, ProfileSet, RankSumResult,
};
use crate::problems::ProblemInstance;
use crate::protocol::{best_of_restarts, ExperimentPlan};
use crate::report::ErtRow;
use crate::seeds::split_seed;
use crate::types::{CostMatrix, DomainError, RunRecord};

/// Costs below one nanosecond are raised to it so profile ratios stay finite.
pub const COST_FLOOR_SECONDS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("no runs logged for {algorithm} on {instance}")]
    MissingRuns { algorithm: String, instance: String },
    #[error("instance `{0}`: {1}")]
    Instance(String, String),
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub grid_points: usize,
    pub grid_min_fraction: f64,
    pub bootstrap: BootstrapSettings,
    pub all_failed: AllFailedPolicy,
    /// Total tuning seconds per solver, spread over the instances.
    pub tuning_seconds: BTreeMap<String, f64>,
}

/// Runs of one (algorithm, instance), grouped by repetition in run order.
#[derive(Debug, Clone, Default)]
pub struct RunTable {
    cells: BTreeMap<(String, String), BTreeMap<u32, Vec<RunRecord>>>,
}

impl RunTable {
    pub fn new(records: impl IntoIterator<Item = RunRecord>) -> Self {
        let mut cells: BTreeMap<(String, String), BTreeMap<u32, Vec<RunRecord>>> = BTreeMap::new();
        for r in records {
            cells
                .entry((r.algorithm_id.clone(), r.instance_id.clone()))
                .or_default()
                .entry(r.repetition)
                .or_default()
                .push(r);
        }
        for reps in cells.values_mut() {
            for runs in reps.values_mut() {
                runs.sort_by_key(|r| r.run_index);
            }
        }
        Self { cells }
    }

    /// Restart sequences in repetition order.
    pub fn repetitions(&self, algorithm: &str, instance: &str) -> Vec<&[RunRecord]> {
        self.cells
            .get(&(algorithm.to_string(), instance.to_string()))
            .map(|reps| reps.values().map(Vec::as_slice).collect())
            .unwrap_or_default()
    }

    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.cells.values().flat_map(|reps| reps.values().flatten())
    }
}

#[derive(Debug, Clone)]
pub struct ProfileOutput {
    pub target_index: usize,
    /// ERT costs before tuning amortization.
    pub raw_costs: CostMatrix<f64>,
    pub costs: CostMatrix<f64>,
    pub profile: ProfileSet<f64>,
}

#[derive(Debug, Clone)]
pub struct RankTest {
    pub instance: String,
    pub solver_a: String,
    pub solver_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub result: RankSumResult,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub time_grid: Vec<f64>,
    pub thresholds: BTreeMap<String, Vec<f64>>,
    pub ert_rows: Vec<ErtRow>,
    pub ecdf: Vec<(String, EcdfCurve)>,
    /// Per instance, one median curve per solver.
    pub medians: Vec<(String, Vec<(String, MedianCurve)>)>,
    pub profiles: Vec<ProfileOutput>,
    pub rank_tests: Vec<RankTest>,
    /// Pairs without enough repetitions for a rank-sum test.
    pub skipped_tests: usize,
}

pub fn thresholds(plan: &ExperimentPlan) -> Result<BTreeMap<String, Vec<f64>>, AnalysisError> {
    plan.instances
        .iter()
        .map(|id| {
            let p = ProblemInstance::<f64>::from_id(id)
                .map_err(|e| AnalysisError::Instance(id.clone(), e.to_string()))?;
            Ok((id.clone(), plan.targets.thresholds(id, p.f_opt())?))
        })
        .collect()
}

pub fn analyze(
    plan: &ExperimentPlan,
    table: &RunTable,
    options: &AnalysisOptions,
) -> Result<Analysis, AnalysisError> {
    let budget = plan.budget.wall_time_limit();
    let thresholds = thresholds(plan)?;
    let solvers: Vec<String> = plan.algorithms.iter().map(|a| a.id.clone()).collect();
    for a in &solvers {
        for i in &plan.instances {
            if table.repetitions(a, i).is_empty() {
                return Err(AnalysisError::MissingRuns {
                    algorithm: a.clone(),
                    instance: i.clone(),
                });
            }
        }
    }

    let mut ert_rows = Vec::new();
    // erts[k][instance][solver]
    let n_targets = plan.targets.len();
    let mut erts = vec![vec![vec![0.0; solvers.len()]; plan.instances.len()]; n_targets];
    for (s, a) in solvers.iter().enumerate() {
        for (p, inst) in plan.instances.iter().enumerate() {
            let reps = table.repetitions(a, inst);
            for (k, &q) in thresholds[inst].iter().enumerate() {
                let times: Vec<Option<f64>> = reps
                    .iter()
                    .map(|runs| repetition_time_to_target(runs, q, budget))
                    .collect();
                let result = ert(q, &times, budget);
                erts[k][p][s] = result.ert;
                ert_rows.push(ErtRow {
                    solver: a.clone(),
                    instance: inst.clone(),
                    result,
                });
            }
        }
    }

    let time_grid = log_time_grid(budget, options.grid_points, options.grid_min_fraction)?;
    let mut ecdf = Vec::new();
    for a in &solvers {
        let groups: Vec<EcdfGroup<'_>> = plan
            .instances
            .iter()
            .map(|inst| EcdfGroup {
                repetitions: table.repetitions(a, inst),
                targets: thresholds[inst].clone(),
                budget,
            })
            .collect();
        ecdf.push((a.clone(), anytime_ecdf(&groups, &time_grid)?));
    }

    let mut medians = Vec::new();
    for (p, inst) in plan.instances.iter().enumerate() {
        let mut curves = Vec::new();
        for (s, a) in solvers.iter().enumerate() {
            let settings = BootstrapSettings {
                seed: split_seed(
                    options.bootstrap.seed,
                    (s * plan.instances.len() + p) as u64,
                ),
                ..options.bootstrap
            };
            curves.push((
                a.clone(),
                median_trajectory(&table.repetitions(a, inst), &time_grid, settings)?,
            ));
        }
        medians.push((inst.clone(), curves));
    }

    let mut profiles = Vec::new();
    for (k, rows) in erts.into_iter().enumerate() {
        let floored = rows
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.max(COST_FLOOR_SECONDS)).collect())
            .collect();
        let raw_costs = CostMatrix::new(solvers.clone(), plan.instances.clone(), floored)?;
        let costs = amortize_tuning(&raw_costs, &options.tuning_seconds)?;
        let profile = performance_profile(&costs, options.all_failed);
        profiles.push(ProfileOutput {
            target_index: k,
            raw_costs,
            costs,
            profile,
        });
    }

    let mut rank_tests = Vec::new();
    let mut skipped_tests = 0;
    for inst in &plan.instances {
        let finals: Vec<Vec<f64>> = solvers
            .iter()
            .map(|a| {
                table
                    .repetitions(a, inst)
                    .iter()
                    .map(|runs| best_of_restarts(runs).map_or(f64::INFINITY, |b| b.value))
                    .collect()
            })
            .collect();
        for i in 0..solvers.len() {
            for j in i + 1..solvers.len() {
                match rank_sum_test(&finals[i], &finals[j]) {
                    Ok(result) => rank_tests.push(RankTest {
                        instance: inst.clone(),
                        solver_a: solvers[i].clone(),
                        solver_b: solvers[j].clone(),
                        n_a: finals[i].len(),
                        n_b: finals[j].len(),
                        result,
                    }),
                    Err(MetricsError::SampleTooSmall(..)) => skipped_tests += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }

    Ok(Analysis {
        time_grid,
        thresholds,
        ert_rows,
        ecdf,
        medians,
        profiles,
        rank_tests,
        skipped_tests,
    })
}

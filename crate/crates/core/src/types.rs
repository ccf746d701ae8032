//! Domain types shared across the harness.
//!
//! Minimization is canonical: a threshold `q` is met when `best_f <= q`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("budget.wall_time_limit must be finite and > 0, got {0}")]
    InvalidWallTime(f64),
    #[error("budget.eval_cap must be >= 1")]
    InvalidEvalCap,
    #[error("targets.values must not be empty")]
    EmptyTargets,
    #[error("targets.values[{0}] is not finite")]
    NonFiniteTarget(usize),
    #[error("targets.values must be strictly decreasing (violated at index {0})")]
    NonMonotoneTargets(usize),
    #[error("relative targets must be positive precisions, got {0}")]
    NonPositivePrecision(f64),
    #[error("relative targets need a known optimum, instance `{0}` has none")]
    MissingOptimum(String),
    #[error("cost matrix shape mismatch: {0}")]
    CostShape(String),
    #[error("cost[{instance}][{solver}] = {value} is not in (0, +inf]")]
    InvalidCost {
        instance: usize,
        solver: usize,
        value: String,
    },
    #[error("duplicate solver id `{0}`")]
    DuplicateSolver(String),
}

/// Wall-clock budget per problem instance, optionally capped in evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    wall_time_limit: f64,
    eval_cap: Option<u64>,
}

impl Budget {
    pub fn new(wall_time_limit: f64, eval_cap: Option<u64>) -> Result<Self, DomainError> {
        if !(wall_time_limit.is_finite() && wall_time_limit > 0.0) {
            return Err(DomainError::InvalidWallTime(wall_time_limit));
        }
        if eval_cap == Some(0) {
            return Err(DomainError::InvalidEvalCap);
        }
        Ok(Self {
            wall_time_limit,
            eval_cap,
        })
    }

    pub fn wall_time_limit(&self) -> f64 {
        self.wall_time_limit
    }

    pub fn eval_cap(&self) -> Option<u64> {
        self.eval_cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Values are objective thresholds.
    Absolute,
    /// Values are precisions added to the instance's known optimum.
    Relative,
}

/// Ordered list of quality thresholds, easiest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSpec {
    kind: TargetKind,
    values: Vec<f64>,
}

impl TargetSpec {
    /// Precision ladder used when a config declares no targets.
    pub const DEFAULT_RELATIVE_LADDER: [f64; 5] = [1e1, 1e0, 1e-1, 1e-2, 1e-3];

    pub fn new(kind: TargetKind, values: Vec<f64>) -> Result<Self, DomainError> {
        if values.is_empty() {
            return Err(DomainError::EmptyTargets);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DomainError::NonFiniteTarget(i));
            }
            if kind == TargetKind::Relative && *v <= 0.0 {
                return Err(DomainError::NonPositivePrecision(*v));
            }
        }
        if let Some(i) = values.windows(2).position(|w| w[1] >= w[0]) {
            return Err(DomainError::NonMonotoneTargets(i + 1));
        }
        Ok(Self { kind, values })
    }

    pub fn default_relative() -> Self {
        Self::new(TargetKind::Relative, Self::DEFAULT_RELATIVE_LADDER.to_vec())
            .expect("default ladder is valid")
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Absolute objective thresholds for an instance, easiest first.
    pub fn thresholds(
        &self,
        instance_id: &str,
        f_opt: Option<f64>,
    ) -> Result<Vec<f64>, DomainError> {
        match self.kind {
            TargetKind::Absolute => Ok(self.values.clone()),
            TargetKind::Relative => {
                let f_opt =
                    f_opt.ok_or_else(|| DomainError::MissingOptimum(instance_id.to_string()))?;
                Ok(self.values.iter().map(|d| f_opt + d).collect())
            }
        }
    }
}

/// One improvement event of the best-so-far objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Seconds since the run started.
    pub elapsed: f64,
    /// Cumulative evaluations at the moment of improvement.
    pub evals: u64,
    pub best_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
    InternalStop,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::TargetReached => "TargetReached",
            Termination::BudgetExhausted => "BudgetExhausted",
            Termination::InternalStop => "InternalStop",
        };
        f.write_str(s)
    }
}

/// First time a run met a threshold; `None` when it never did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstHit {
    pub target: f64,
    pub elapsed: Option<f64>,
}

/// One independent optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm_id: String,
    pub instance_id: String,
    pub repetition: u32,
    /// Position of this run within its repetition's restart sequence.
    pub run_index: u32,
    pub seed: u64,
    /// Echo of the algorithm parameters the run was built from.
    pub params: serde_json::Value,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Per-target first hits, in target-ladder order.
    pub first_hits: Vec<FirstHit>,
    pub time_used: f64,
    pub evals_used: u64,
    /// Evaluations whose query was clamped into the bounds first.
    pub clamped_evals: u64,
    pub termination: Termination,
}

impl RunRecord {
    pub fn final_best(&self) -> Option<f64> {
        self.trajectory.last().map(|p| p.best_f)
    }

    /// Recomputes first hits for `thresholds` from the trajectory.
    pub fn first_hits_for(trajectory: &[TrajectoryPoint], thresholds: &[f64]) -> Vec<FirstHit> {
        thresholds
            .iter()
            .map(|&q| FirstHit {
                target: q,
                elapsed: trajectory.iter().find(|p| p.best_f <= q).map(|p| p.elapsed),
            })
            .collect()
    }
}

/// A broken [`RunRecord`] invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ElapsedNegative { index: usize },
    ElapsedNonMonotone { index: usize },
    EvalsNonMonotone { index: usize },
    BestNotStrictlyDecreasing { index: usize },
    BestNotFinite { index: usize },
    FirstPointZeroEvals,
    EmptyTrajectoryWithEvals,
    TimeUsedInvalid,
    TimeUsedBeforeLastPoint,
    EvalsUsedBelowLastPoint,
    TargetReachedUnmet,
    FirstHitInconsistent { target_index: usize },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::ElapsedNegative { .. } => "elapsed negative",
            Violation::ElapsedNonMonotone { .. } => "elapsed non-monotone",
            Violation::EvalsNonMonotone { .. } => "evals non-monotone",
            Violation::BestNotStrictlyDecreasing { .. } => "best_f not strictly decreasing",
            Violation::BestNotFinite { .. } => "best_f not finite",
            Violation::FirstPointZeroEvals => "first point has zero evals",
            Violation::EmptyTrajectoryWithEvals => "empty trajectory despite evaluations",
            Violation::TimeUsedInvalid => "time_used invalid",
            Violation::TimeUsedBeforeLastPoint => "time_used before last improvement",
            Violation::EvalsUsedBelowLastPoint => "evals_used below last improvement",
            Violation::TargetReachedUnmet => "target reached but hardest target unmet",
            Violation::FirstHitInconsistent { .. } => "first hit inconsistent with trajectory",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ElapsedNegative { index }
            | Violation::ElapsedNonMonotone { index }
            | Violation::EvalsNonMonotone { index }
            | Violation::BestNotStrictlyDecreasing { index }
            | Violation::BestNotFinite { index } => write!(f, "{} (point {index})", self.name()),
            Violation::FirstHitInconsistent { target_index } => {
                write!(f, "{} (target {target_index})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

/// Checks every [`RunRecord`] invariant and returns all violations found.
pub fn validate(record: &RunRecord) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let traj = &record.trajectory;

    for (i, p) in traj.iter().enumerate() {
        if !(p.elapsed >= 0.0) {
            out.push(Violation::ElapsedNegative { index: i });
        }
        if !p.best_f.is_finite() {
            out.push(Violation::BestNotFinite { index: i });
        }
    }
    for (i, w) in traj.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if b.elapsed < a.elapsed {
            out.push(Violation::ElapsedNonMonotone { index: i + 1 });
        }
        if b.evals < a.evals {
            out.push(Violation::EvalsNonMonotone { index: i + 1 });
        }
        if !(b.best_f < a.best_f) {
            out.push(Violation::BestNotStrictlyDecreasing { index: i + 1 });
        }
    }

    match traj.last() {
        None => {
            if record.evals_used > 0 {
                out.push(Violation::EmptyTrajectoryWithEvals);
            }
        }
        Some(last) => {
            if traj[0].evals == 0 {
                out.push(Violation::FirstPointZeroEvals);
            }
            if record.time_used < last.elapsed {
                out.push(Violation::TimeUsedBeforeLastPoint);
            }
            if record.evals_used < last.evals {
                out.push(Violation::EvalsUsedBelowLastPoint);
            }
        }
    }
    if !(record.time_used.is_finite() && record.time_used >= 0.0) {
        out.push(Violation::TimeUsedInvalid);
    }

    let thresholds: Vec<f64> = record.first_hits.iter().map(|h| h.target).collect();
    let expected = RunRecord::first_hits_for(traj, &thresholds);
    for (i, (got, want)) in record.first_hits.iter().zip(&expected).enumerate() {
        if got.elapsed != want.elapsed {
            out.push(Violation::FirstHitInconsistent { target_index: i });
        }
    }

    if record.termination == Termination::TargetReached {
        let met = match (record.first_hits.last(), record.final_best()) {
            (Some(hardest), Some(best)) => best <= hardest.target,
            _ => false,
        };
        if !met {
            out.push(Violation::TargetReachedUnmet);
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Expected running time to one target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErtResult<S> {
    pub target: S,
    /// Seconds, or `+inf` when no run succeeded.
    pub ert: S,
    pub successes: usize,
    pub runs: usize,
    pub success_rate: S,
}

/// Per (instance, solver) cost; `+inf` marks failure.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<S> {
    solvers: Vec<String>,
    instances: Vec<String>,
    /// Row per instance, column per solver.
    cost: Vec<Vec<S>>,
}

impl<S: Scalar> CostMatrix<S> {
    pub fn new(
        solvers: Vec<String>,
        instances: Vec<String>,
        cost: Vec<Vec<S>>,
    ) -> Result<Self, DomainError> {
        if cost.len() != instances.len() {
            return Err(DomainError::CostShape(format!(
                "{} rows for {} instances",
                cost.len(),
                instances.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &solvers {
            if !seen.insert(s.as_str()) {
                return Err(DomainError::DuplicateSolver(s.clone()));
            }
        }
        for (p, row) in cost.iter().enumerate() {
            if row.len() != solvers.len() {
                return Err(DomainError::CostShape(format!(
                    "row {p} has {} entries for {} solvers",
                    row.len(),
                    solvers.len()
                )));
            }
            for (s, &c) in row.iter().enumerate() {
                if !(c > S::zero()) {
                    return Err(DomainError::InvalidCost {
                        instance: p,
                        solver: s,
                        value: format!("{c:?}"),
                    });
                }
            }
        }
        Ok(Self {
            solvers,
            instances,
            cost,
        })
    }

    pub fn solvers(&self) -> &[String] {
        &self.solvers
    }

    pub fn instances(&self) -> &[String] {
        &self.instances
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.cost
    }

    pub fn get(&self, instance: usize, solver: usize) -> S {
        self.cost[instance][solver]
    }

    pub fn solver_index(&self, id: &str) -> Option<usize> {
        self.solvers.iter().position(|s| s == id)
    }

    pub fn row_all_failed(&self, instance: usize) -> bool {
        self.cost[instance].iter().all(|c| c.is_infinite())
    }

    /// Applies `f` to every finite entry; infinite entries are kept.
    pub fn map_finite(&self, mut f: impl FnMut(usize, usize, S) -> S) -> Self {
        let cost = self
            .cost
            .iter()
            .enumerate()
            .map(|(p, row)| {
                row.iter()
                    .enumerate()
                    .map(|(s, &c)| if c.is_finite() { f(p, s, c) } else { c })
                    .collect()
            })
            .collect();
        Self {
            solvers: self.solvers.clone(),
            instances: self.instances.clone(),
            cost,
        }
    }
}

//! Time-fair evaluation loop.
//!
//! Each (algorithm, instance, repetition) triple receives the wall-clock
//! budget `T`. Independent runs are started back to back, each with a
//! freshly derived seed, until the budget is spent. A run ends when the
//! hardest target is met, when the optimizer stops on its own, or when the
//! budget runs out. Budget checks happen between iterations only.
//!
//! In virtual mode the cost of the next iteration is known in advance, so a
//! step that would cross `T` is never started and the sum of run times never
//! exceeds `T`. In real mode the check reads the clock, and the overshoot is
//! bounded by one iteration.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::clock::{nanos_to_seconds, seconds_to_nanos, Clock, ClockError, ClockMode};
use crate::evaluator::CountingEvaluator;
use crate::optimizers::{self, AlgorithmSpec, Optimizer, OptimizerError};
use crate::problems::{ProblemError, ProblemInstance};
use crate::seeds::derive_seed;
use crate::types::{Budget, DomainError, RunRecord, TargetSpec, Termination};
use crate::Scalar;

pub use crate::seeds::{split_seed, SEED_SCHEME};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("repetitions must be >= 1")]
    NoRepetitions,
    #[error("plan has no algorithms")]
    NoAlgorithms,
    #[error("plan has no instances")]
    NoInstances,
    #[error("duplicate algorithm id `{0}`")]
    DuplicateAlgorithm(String),
    #[error("duplicate instance id `{0}`")]
    DuplicateInstance(String),
    #[error("algorithm `{0}` would not advance the virtual clock (cost_per_eval and overhead are both zero)")]
    FreeVirtualStep(String),
    #[error("restart planning needs T > 0 and tau > 0, got T = {budget}, tau = {tau}")]
    NonPositiveDuration { budget: f64, tau: f64 },
    #[error("no complete run fits: floor(T / tau) = floor({budget} / {tau}) = 0")]
    NoCompleteRun { budget: f64, tau: f64 },
    #[error("best-of-restarts over an empty record list")]
    EmptyRecords,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Clock(#[from] ClockError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub algorithms: Vec<AlgorithmSpec>,
    pub instances: Vec<String>,
    pub budget: Budget,
    pub targets: TargetSpec,
    pub repetitions: u32,
    pub master_seed: u64,
    pub clock: ClockMode,
}

impl ExperimentPlan {
    /// Checks the plan and resolves its instances.
    pub fn resolve<S: Scalar>(&self) -> Result<Vec<ProblemInstance<S>>, ProtocolError> {
        if self.repetitions == 0 {
            return Err(ProtocolError::NoRepetitions);
        }
        if self.algorithms.is_empty() {
            return Err(ProtocolError::NoAlgorithms);
        }
        if self.instances.is_empty() {
            return Err(ProtocolError::NoInstances);
        }
        self.clock.validate()?;
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].iter().any(|b| b.id == a.id) {
                return Err(ProtocolError::DuplicateAlgorithm(a.id.clone()));
            }
            a.validate(&self.clock)?;
            if let ClockMode::Virtual { cost_per_eval } = self.clock {
                if seconds_to_nanos(cost_per_eval) == 0
                    && seconds_to_nanos(a.overhead_per_iteration.unwrap_or(0.0)) == 0
                {
                    return Err(ProtocolError::FreeVirtualStep(a.id.clone()));
                }
            }
        }
        let mut problems = Vec::with_capacity(self.instances.len());
        for (i, id) in self.instances.iter().enumerate() {
            if self.instances[..i].contains(id) {
                return Err(ProtocolError::DuplicateInstance(id.clone()));
            }
            let p = ProblemInstance::<S>::from_id(id)?;
            self.targets
                .thresholds(id, p.f_opt().map(Scalar::to_f64_lossy))?;
            problems.push(p);
        }
        Ok(problems)
    }
}

/// All runs of one (algorithm, instance, repetition) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionOutcome {
    pub algorithm_id: String,
    pub instance_id: String,
    pub repetition: u32,
    pub records: Vec<RunRecord>,
    /// Sum of run times charged against the budget.
    pub time_used: f64,
    pub evals_used: u64,
    /// `max(0, time_used - T)`; always zero in virtual mode.
    pub overshoot: f64,
    /// Longest observed iteration, in the clock's seconds.
    pub max_iteration_seconds: f64,
    /// Host time spent outside run clocks (seed derivation, record assembly).
    pub bookkeeping_seconds: f64,
}

struct RunExec {
    record: RunRecord,
    time_ns: Option<u64>,
    max_iteration_seconds: f64,
}

enum Remaining {
    VirtualNanos(u64),
    RealSeconds(f64),
}

#[allow(clippy::too_many_arguments)]
fn execute_run<S: Scalar>(
    algorithm: &AlgorithmSpec,
    instance: &ProblemInstance<S>,
    clock_mode: ClockMode,
    thresholds: &[f64],
    remaining: Remaining,
    evals_remaining: Option<u64>,
    seed: u64,
    repetition: u32,
    run_index: u32,
) -> Result<RunExec, ProtocolError> {
    // Started first so that real-mode setup time is charged to the run.
    let mut clock = Clock::new(clock_mode);
    let mut opt = optimizers::init(algorithm, instance, seed, &clock_mode)?;
    let step_evals = opt.evals_per_step();
    let step_cost_ns = clock.step_cost_nanos(step_evals, opt.overhead_per_step());
    let hardest = thresholds.last().copied();

    let mut ev = CountingEvaluator::new(instance, &mut clock);
    let mut iterations = 0u64;
    let mut max_iter = 0.0f64;
    let mut top = ev.now();

    let termination = loop {
        if iterations > 0 {
            let t = ev.now();
            max_iter = max_iter.max(t - top);
            top = t;
        }
        let out_of_time = match remaining {
            Remaining::VirtualNanos(left) => {
                let now = ev.clock().now_nanos().expect("virtual clock");
                now + step_cost_ns.expect("virtual clock") > left
            }
            Remaining::RealSeconds(left) => top >= left,
        };
        let out_of_evals = evals_remaining.is_some_and(|cap| ev.evals() + step_evals > cap);
        if out_of_time || out_of_evals {
            break Termination::BudgetExhausted;
        }

        opt.step(&mut ev)?;
        iterations += 1;

        let best = ev.best().map(Scalar::to_f64_lossy);
        if let (Some(q), Some(b)) = (hardest, best) {
            if b <= q {
                break Termination::TargetReached;
            }
        }
        if opt.converged() || algorithm.max_iterations.is_some_and(|m| iterations >= m) {
            break Termination::InternalStop;
        }
    };

    let time_used = if termination == Termination::BudgetExhausted {
        top
    } else {
        let t = ev.now();
        if iterations > 0 {
            max_iter = max_iter.max(t - top);
        }
        t
    };
    let time_ns = ev.clock().now_nanos();
    let evals_used = ev.evals();
    let clamped_evals = ev.clamped();
    let trajectory = ev.into_trajectory();
    let first_hits = RunRecord::first_hits_for(&trajectory, thresholds);

    Ok(RunExec {
        record: RunRecord {
            algorithm_id: algorithm.id.clone(),
            instance_id: instance.id().to_string(),
            repetition,
            run_index,
            seed,
            params: serde_json::to_value(algorithm).unwrap_or(serde_json::Value::Null),
            trajectory,
            first_hits,
            time_used,
            evals_used,
            clamped_evals,
            termination,
        },
        time_ns,
        max_iteration_seconds: max_iter,
    })
}

/// Spends one budget `T` on back-to-back independent runs of `algorithm`.
pub fn run_time_fair<S: Scalar>(
    plan: &ExperimentPlan,
    algorithm: &AlgorithmSpec,
    instance: &ProblemInstance<S>,
    repetition: u32,
) -> Result<RepetitionOutcome, ProtocolError> {
    let wall = Instant::now();
    let limit = plan.budget.wall_time_limit();
    let thresholds = plan
        .targets
        .thresholds(instance.id(), instance.f_opt().map(Scalar::to_f64_lossy))?;
    let limit_ns = seconds_to_nanos(limit);

    let mut records = Vec::new();
    let mut used_ns = 0u64;
    let mut used_real = 0.0f64;
    let mut evals_used = 0u64;
    let mut max_iter = 0.0f64;
    let mut inside_runs = 0.0f64;

    loop {
        let remaining = match plan.clock {
            ClockMode::Virtual { .. } => {
                if used_ns >= limit_ns {
                    break;
                }
                Remaining::VirtualNanos(limit_ns - used_ns)
            }
            ClockMode::Real => {
                if used_real >= limit {
                    break;
                }
                Remaining::RealSeconds(limit - used_real)
            }
        };
        let evals_remaining = plan.budget.eval_cap().map(|c| c.saturating_sub(evals_used));
        if evals_remaining == Some(0) {
            break;
        }
        let run_index = records.len() as u32;
        let seed = derive_seed(
            plan.master_seed,
            &algorithm.id,
            instance.id(),
            repetition,
            run_index,
        );
        let started = Instant::now();
        let exec = execute_run(
            algorithm,
            instance,
            plan.clock,
            &thresholds,
            remaining,
            evals_remaining,
            seed,
            repetition,
            run_index,
        )?;
        inside_runs += started.elapsed().as_secs_f64();

        let rec = exec.record;
        // A later run that cannot complete a single step is not recorded.
        let empty = rec.evals_used == 0 && rec.termination == Termination::BudgetExhausted;
        if empty && !records.is_empty() {
            break;
        }
        max_iter = max_iter.max(exec.max_iteration_seconds);
        used_ns += exec.time_ns.unwrap_or(0);
        used_real += rec.time_used;
        evals_used += rec.evals_used;
        let exhausted = rec.termination == Termination::BudgetExhausted;
        records.push(rec);
        if exhausted {
            break;
        }
    }

    let time_used = match plan.clock {
        ClockMode::Virtual { .. } => nanos_to_seconds(used_ns),
        ClockMode::Real => used_real,
    };
    let total_wall = wall.elapsed().as_secs_f64();
    Ok(RepetitionOutcome {
        algorithm_id: algorithm.id.clone(),
        instance_id: instance.id().to_string(),
        repetition,
        records,
        time_used,
        evals_used,
        overshoot: (time_used - limit).max(0.0),
        max_iteration_seconds: max_iter,
        bookkeeping_seconds: (total_wall - inside_runs).max(0.0),
    })
}

/// Runs every (algorithm, instance, repetition) triple of the plan.
///
/// Outcomes are ordered by algorithm, then instance, then repetition.
/// `parallel` is honoured in virtual mode only; real-mode runs are always
/// sequential so they do not contend for the machine.
pub fn run_plan<S: Scalar>(
    plan: &ExperimentPlan,
    parallel: bool,
) -> Result<Vec<RepetitionOutcome>, ProtocolError> {
    let problems = plan.resolve::<S>()?;
    let mut jobs = Vec::new();
    for a in &plan.algorithms {
        for p in &problems {
            for r in 0..plan.repetitions {
                jobs.push((a, p, r));
            }
        }
    }
    if parallel && plan.clock.is_virtual() {
        jobs.par_iter()
            .map(|(a, p, r)| run_time_fair(plan, a, p, *r))
            .collect()
    } else {
        jobs.iter()
            .map(|(a, p, r)| run_time_fair(plan, a, p, *r))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestOfRestarts {
    /// Minimum final best value, `+inf` when no run evaluated anything.
    pub value: f64,
    /// Set when no run produced a value.
    pub vacuous: bool,
}

pub fn best_of_restarts(records: &[RunRecord]) -> Result<BestOfRestarts, ProtocolError> {
    if records.is_empty() {
        return Err(ProtocolError::EmptyRecords);
    }
    let value = records
        .iter()
        .filter_map(RunRecord::final_best)
        .fold(f64::INFINITY, f64::min);
    Ok(BestOfRestarts {
        value,
        vacuous: value == f64::INFINITY,
    })
}

/// `floor(T / tau)`: complete runs of average length `tau` fitting in `T`.
pub fn restart_count(budget: f64, tau: f64) -> Result<u64, ProtocolError> {
    if !(budget > 0.0 && tau > 0.0 && budget.is_finite() && tau.is_finite()) {
        return Err(ProtocolError::NonPositiveDuration { budget, tau });
    }
    Ok((budget / tau).floor() as u64)
}

/// Like [`restart_count`] but rejects plans where not even one run fits.
pub fn planned_restarts(budget: f64, tau: f64) -> Result<u64, ProtocolError> {
    match restart_count(budget, tau)? {
        0 => Err(ProtocolError::NoCompleteRun { budget, tau }),
        k => Ok(k),
    }
}

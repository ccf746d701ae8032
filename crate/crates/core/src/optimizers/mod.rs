//! Reference optimizers behind an iteration-granular contract.
//!
//! The protocol drives an optimizer one [`Optimizer::step`] at a time and
//! checks the budget between steps, never inside one.

mod pso;
mod random_search;
mod wrappers;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{ClockError, ClockMode};
use crate::evaluator::CountingEvaluator;
use crate::problems::ProblemInstance;
use crate::seeds::split_seed;
use crate::Scalar;

pub use pso::{Pso, PsoParams};
pub use random_search::RandomSearch;
pub use wrappers::{StagnationParams, StagnationRestart, SyntheticOverhead};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("unknown algorithm `{0}` (known: pso, random-search)")]
    UnknownAlgorithm(String),
    #[error("invalid parameters for `{algorithm}`: {reason}")]
    InvalidParams {
        algorithm: String,
        reason: String,
    },
    #[error("synthetic overhead requires a virtual clock")]
    OverheadOnRealClock,
    #[error(transparent)]
    Clock(#[from] ClockError),
}

/// Outcome of one optimizer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<S> {
    pub evals_this_step: u64,
    /// Set when this step improved the optimizer's best.
    pub new_best: Option<(Vec<S>, S)>,
}

pub trait Optimizer<S: Scalar>: Send {
    /// Evaluations performed by every call to [`Optimizer::step`].
    fn evals_per_step(&self) -> u64;

    /// Seconds of synthetic overhead charged per step on a virtual clock.
    fn overhead_per_step(&self) -> f64 {
        0.0
    }

    fn step(
        &mut self,
        eval: &mut CountingEvaluator<'_, S>,
    ) -> Result<StepReport<S>, OptimizerError>;

    fn best(&self) -> Option<(&[S], S)>;

    /// Discards all state and reinitializes from `seed`.
    fn reset(&mut self, seed: u64);

    /// The optimizer declares it will not make further progress.
    fn converged(&self) -> bool {
        false
    }
}

impl<S: Scalar, O: Optimizer<S> + ?Sized> Optimizer<S> for Box<O> {
    fn evals_per_step(&self) -> u64 {
        (**self).evals_per_step()
    }
    fn overhead_per_step(&self) -> f64 {
        (**self).overhead_per_step()
    }
    fn step(
        &mut self,
        eval: &mut CountingEvaluator<'_, S>,
    ) -> Result<StepReport<S>, OptimizerError> {
        (**self).step(eval)
    }
    fn best(&self) -> Option<(&[S], S)> {
        (**self).best()
    }
    fn reset(&mut self, seed: u64) {
        (**self).reset(seed)
    }
    fn converged(&self) -> bool {
        (**self).converged()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Pso,
    RandomSearch,
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Pso => "pso",
            AlgorithmKind::RandomSearch => "random-search",
        }
    }
}

impl FromStr for AlgorithmKind {
    type Err = OptimizerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pso" => Ok(AlgorithmKind::Pso),
            "random-search" => Ok(AlgorithmKind::RandomSearch),
            other => Err(OptimizerError::UnknownAlgorithm(other.to_string())),
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Declarative description of one benchmarked algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    /// Label used in logs, tables and seeds.
    pub id: String,
    pub kind: AlgorithmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso: Option<PsoParams>,
    /// Iterations after which a single run stops on its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stagnation: Option<StagnationParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overhead_per_iteration: Option<f64>,
}

impl AlgorithmSpec {
    pub fn new(id: impl Into<String>, kind: AlgorithmKind) -> Self {
        Self {
            id: id.into(),
            kind,
            pso: None,
            max_iterations: None,
            stagnation: None,
            overhead_per_iteration: None,
        }
    }

    /// Fills in defaults so the spec echoes every effective parameter.
    pub fn normalized(mut self) -> Self {
        if self.kind == AlgorithmKind::Pso && self.pso.is_none() {
            self.pso = Some(PsoParams::default());
        }
        self
    }

    pub fn validate(&self, clock: &ClockMode) -> Result<(), OptimizerError> {
        let invalid = |reason: String| OptimizerError::InvalidParams {
            algorithm: self.id.clone(),
            reason,
        };
        if self.id.is_empty() {
            return Err(invalid("id must not be empty".into()));
        }
        if self
            .id
            .chars()
            .any(|c| !(c.is_ascii_alphanumeric() || "-_.".contains(c)))
        {
            return Err(invalid("id may only contain [A-Za-z0-9._-]".into()));
        }
        match (self.kind, &self.pso) {
            (AlgorithmKind::Pso, Some(p)) => p.validate().map_err(invalid)?,
            (AlgorithmKind::RandomSearch, Some(_)) => {
                return Err(invalid("`pso` parameters given for random-search".into()))
            }
            _ => {}
        }
        if self.max_iterations == Some(0) {
            return Err(invalid("max_iterations must be >= 1".into()));
        }
        if let Some(s) = &self.stagnation {
            s.validate().map_err(invalid)?;
        }
        if let Some(o) = self.overhead_per_iteration {
            if !(o.is_finite() && o >= 0.0) {
                return Err(invalid(format!(
                    "overhead_per_iteration must be finite and >= 0, got {o}"
                )));
            }
            if !clock.is_virtual() {
                return Err(OptimizerError::OverheadOnRealClock);
            }
        }
        Ok(())
    }
}

/// Builds a fresh optimizer state; zero evaluations are consumed.
pub fn init<S: Scalar>(
    spec: &AlgorithmSpec,
    problem: &ProblemInstance<S>,
    seed: u64,
    clock: &ClockMode,
) -> Result<Box<dyn Optimizer<S>>, OptimizerError> {
    spec.validate(clock)?;
    let base_seed = if spec.stagnation.is_some() {
        split_seed(seed, 0)
    } else {
        seed
    };
    let base: Box<dyn Optimizer<S>> = match spec.kind {
        AlgorithmKind::Pso => {
            let params = spec.pso.clone().unwrap_or_default();
            Box::new(Pso::new(problem, params, base_seed).map_err(|reason| {
                OptimizerError::InvalidParams {
                    algorithm: spec.id.clone(),
                    reason,
                }
            })?)
        }
        AlgorithmKind::RandomSearch => Box::new(RandomSearch::new(problem, base_seed)),
    };
    let with_restarts: Box<dyn Optimizer<S>> = match &spec.stagnation {
        Some(params) => Box::new(StagnationRestart::new(base, params.clone(), seed)),
        None => base,
    };
    Ok(match spec.overhead_per_iteration {
        Some(o) => Box::new(SyntheticOverhead::new(with_restarts, o, clock)?),
        None => with_restarts,
    })
}

pub(crate) fn sample_in<S: Scalar, R: Rng>(rng: &mut R, lo: S, hi: S) -> S {
    let u = S::lit(rng.gen::<f64>());
    (lo + (hi - lo) * u).max(lo).min(hi)
}

pub(crate) fn sample_point<S: Scalar, R: Rng>(rng: &mut R, bounds: &[(S, S)]) -> Vec<S> {
    bounds
        .iter()
        .map(|&(lo, hi)| sample_in(rng, lo, hi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Clock;

    const VIRTUAL: ClockMode = ClockMode::Virtual {
        cost_per_eval: 0.001,
    };

    fn drive(spec: &AlgorithmSpec, id: &str, seed: u64, steps: usize) -> Vec<StepReport<f64>> {
        let p = ProblemInstance::<f64>::from_id(id).unwrap();
        let mut opt = init(spec, &p, seed, &VIRTUAL).unwrap();
        let mut clock = Clock::new(VIRTUAL);
        let mut ev = CountingEvaluator::new(&p, &mut clock);
        (0..steps).map(|_| opt.step(&mut ev).unwrap()).collect()
    }

    #[test]
    fn random_search_init_has_no_best() {
        let p = ProblemInstance::<f64>::from_id("sphere-d2").unwrap();
        let spec = AlgorithmSpec::new("rs", AlgorithmKind::RandomSearch);
        let opt = init(&spec, &p, 42, &VIRTUAL).unwrap();
        assert!(opt.best().is_none());
        assert_eq!(opt.evals_per_step(), 1);
    }

    #[test]
    fn unknown_algorithm_rejected() {
        assert_eq!(
            "cma-es".parse::<AlgorithmKind>(),
            Err(OptimizerError::UnknownAlgorithm("cma-es".into()))
        );
    }

    #[test]
    fn swarm_of_one_rejected() {
        let p = ProblemInstance::<f64>::from_id("rastrigin-d10").unwrap();
        let mut spec = AlgorithmSpec::new("pso", AlgorithmKind::Pso);
        spec.pso = Some(PsoParams {
            swarm_size: 1,
            ..PsoParams::default()
        });
        assert!(matches!(
            init(&spec, &p, 7, &VIRTUAL),
            Err(OptimizerError::InvalidParams { .. })
        ));
    }

    #[test]
    fn step_eval_counts() {
        let rs = AlgorithmSpec::new("rs", AlgorithmKind::RandomSearch);
        assert!(drive(&rs, "sphere-d2", 1, 5)
            .iter()
            .all(|r| r.evals_this_step == 1));
        let pso = AlgorithmSpec::new("pso", AlgorithmKind::Pso).normalized();
        assert!(drive(&pso, "rastrigin-d10", 1, 5)
            .iter()
            .all(|r| r.evals_this_step == 40));
    }

    #[test]
    fn same_seed_same_reports() {
        let pso = AlgorithmSpec::new("pso", AlgorithmKind::Pso);
        assert_eq!(
            drive(&pso, "ackley-d5", 99, 20),
            drive(&pso, "ackley-d5", 99, 20)
        );
        assert_ne!(
            drive(&pso, "ackley-d5", 99, 20),
            drive(&pso, "ackley-d5", 100, 20)
        );
    }

    #[test]
    fn overhead_requires_virtual_clock() {
        let p = ProblemInstance::<f64>::from_id("sphere-d2").unwrap();
        let mut spec = AlgorithmSpec::new("heavy", AlgorithmKind::Pso);
        spec.overhead_per_iteration = Some(0.1);
        assert!(matches!(
            init(&spec, &p, 1, &ClockMode::Real),
            Err(OptimizerError::OverheadOnRealClock)
        ));
    }

    #[test]
    fn spec_validation() {
        let mut spec = AlgorithmSpec::new("rs", AlgorithmKind::RandomSearch);
        spec.pso = Some(PsoParams::default());
        assert!(spec.validate(&VIRTUAL).is_err());
        let mut spec = AlgorithmSpec::new("bad id", AlgorithmKind::RandomSearch);
        assert!(spec.validate(&VIRTUAL).is_err());
        spec.id = "ok".into();
        spec.max_iterations = Some(0);
        assert!(spec.validate(&VIRTUAL).is_err());
    }
}

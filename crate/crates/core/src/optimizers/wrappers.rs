use serde::{Deserialize, Serialize};

use super::{Optimizer, OptimizerError, StepReport};
use crate::clock::ClockMode;
use crate::evaluator::CountingEvaluator;
use crate::seeds::split_seed;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagnationParams {
    /// Consecutive non-improving iterations that trigger a restart.
    pub window: u64,
    /// An iteration improves only if it lowers the anchor best by more than this.
    #[serde(default)]
    pub epsilon: f64,
    /// After this many restarts the wrapper reports convergence instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_restarts: Option<u32>,
}

impl StagnationParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.window == 0 {
            return Err("stagnation.window must be >= 1".into());
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(format!(
                "stagnation.epsilon must be finite and >= 0, got {}",
                self.epsilon
            ));
        }
        Ok(())
    }
}

/// Reinitializes the inner optimizer on fitness plateaus, keeping the global best.
///
/// Restart `k` reseeds the inner optimizer with `split_seed(seed, k)`; the
/// initial state uses `k = 0`.
pub struct StagnationRestart<S, O> {
    inner: O,
    params: StagnationParams,
    epsilon: S,
    seed: u64,
    restarts: u32,
    anchor: Option<S>,
    stale: u64,
    iterations: u64,
    restart_iterations: Vec<u64>,
    global_best: Option<(Vec<S>, S)>,
    exhausted: bool,
}

impl<S: Scalar, O: Optimizer<S>> StagnationRestart<S, O> {
    /// `inner` must already be seeded with `split_seed(seed, 0)`.
    pub fn new(inner: O, params: StagnationParams, seed: u64) -> Self {
        let epsilon = S::lit(params.epsilon);
        Self {
            inner,
            params,
            epsilon,
            seed,
            restarts: 0,
            anchor: None,
            stale: 0,
            iterations: 0,
            restart_iterations: Vec::new(),
            global_best: None,
            exhausted: false,
        }
    }

    pub fn restarts(&self) -> u32 {
        self.restarts
    }

    /// 1-based iteration numbers at which restarts were triggered.
    pub fn restart_iterations(&self) -> &[u64] {
        &self.restart_iterations
    }
}

impl<S: Scalar, O: Optimizer<S>> Optimizer<S> for StagnationRestart<S, O> {
    fn evals_per_step(&self) -> u64 {
        self.inner.evals_per_step()
    }

    fn overhead_per_step(&self) -> f64 {
        self.inner.overhead_per_step()
    }

    fn step(
        &mut self,
        eval: &mut CountingEvaluator<'_, S>,
    ) -> Result<StepReport<S>, OptimizerError> {
        let report = self.inner.step(eval)?;
        self.iterations += 1;

        let mut new_best = None;
        if let Some((x, f)) = self.inner.best() {
            if self.global_best.as_ref().map_or(true, |(_, g)| f < *g) {
                self.global_best = Some((x.to_vec(), f));
                new_best = self.global_best.clone();
            }
            match self.anchor {
                Some(a) if a - f > self.epsilon => {
                    self.anchor = Some(f);
                    self.stale = 0;
                }
                Some(_) => self.stale += 1,
                None => {
                    self.anchor = Some(f);
                    self.stale = 0;
                }
            }
        }

        if self.stale >= self.params.window {
            if self
                .params
                .max_restarts
                .is_some_and(|m| self.restarts >= m)
            {
                self.exhausted = true;
            } else {
                self.restarts += 1;
                self.restart_iterations.push(self.iterations);
                self.inner
                    .reset(split_seed(self.seed, u64::from(self.restarts)));
                self.anchor = None;
                self.stale = 0;
            }
        }

        Ok(StepReport {
            evals_this_step: report.evals_this_step,
            new_best,
        })
    }

    fn best(&self) -> Option<(&[S], S)> {
        self.global_best.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.inner.reset(split_seed(seed, 0));
        self.restarts = 0;
        self.anchor = None;
        self.stale = 0;
        self.iterations = 0;
        self.restart_iterations.clear();
        self.global_best = None;
        self.exhausted = false;
    }

    fn converged(&self) -> bool {
        self.exhausted || self.inner.converged()
    }
}

/// Charges a fixed synthetic cost per iteration on a virtual clock.
///
/// Search behaviour is that of the inner optimizer.
pub struct SyntheticOverhead<O> {
    inner: O,
    overhead: f64,
}

impl<O> SyntheticOverhead<O> {
    pub fn new(inner: O, overhead: f64, clock: &ClockMode) -> Result<Self, OptimizerError> {
        if !clock.is_virtual() {
            return Err(OptimizerError::OverheadOnRealClock);
        }
        if !(overhead.is_finite() && overhead >= 0.0) {
            return Err(OptimizerError::InvalidParams {
                algorithm: "synthetic-overhead".into(),
                reason: format!("overhead must be finite and >= 0, got {overhead}"),
            });
        }
        Ok(Self { inner, overhead })
    }
}

impl<S: Scalar, O: Optimizer<S>> Optimizer<S> for SyntheticOverhead<O> {
    fn evals_per_step(&self) -> u64 {
        self.inner.evals_per_step()
    }

    fn overhead_per_step(&self) -> f64 {
        self.inner.overhead_per_step() + self.overhead
    }

    fn step(
        &mut self,
        eval: &mut CountingEvaluator<'_, S>,
    ) -> Result<StepReport<S>, OptimizerError> {
        let report = self.inner.step(eval)?;
        eval.charge_overhead(self.overhead)?;
        Ok(report)
    }

    fn best(&self) -> Option<(&[S], S)> {
        self.inner.best()
    }

    fn reset(&mut self, seed: u64) {
        self.inner.reset(seed)
    }

    fn converged(&self) -> bool {
        self.inner.converged()
    }
}

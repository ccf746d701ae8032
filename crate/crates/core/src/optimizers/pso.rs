use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sample_point, Optimizer, OptimizerError, StepReport};
use crate::evaluator::CountingEvaluator;
use crate::problems::ProblemInstance;
use crate::Scalar;

/// Global-best PSO coefficients. Defaults are the usual constriction values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Maximum speed per coordinate as a fraction of the bound range.
    pub velocity_clamp: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 40,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            velocity_clamp: 0.5,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.swarm_size < 2 {
            return Err(format!("swarm_size must be >= 2, got {}", self.swarm_size));
        }
        if !(0.0..1.0).contains(&self.inertia) {
            return Err(format!("inertia must be in [0, 1), got {}", self.inertia));
        }
        if !(self.cognitive > 0.0 && self.cognitive.is_finite()) {
            return Err(format!("cognitive must be > 0, got {}", self.cognitive));
        }
        if !(self.social > 0.0 && self.social.is_finite()) {
            return Err(format!("social must be > 0, got {}", self.social));
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp.is_finite()) {
            return Err(format!(
                "velocity_clamp must be > 0, got {}",
                self.velocity_clamp
            ));
        }
        Ok(())
    }
}

/// Particle swarm with a global-best topology and asynchronous best updates.
///
/// The first step evaluates the initial swarm; every later step moves and
/// re-evaluates each particle once.
pub struct Pso<S> {
    params: PsoParams,
    bounds: Vec<(S, S)>,
    vmax: Vec<S>,
    rng: ChaCha8Rng,
    positions: Vec<Vec<S>>,
    velocities: Vec<Vec<S>>,
    personal_best: Vec<Vec<S>>,
    personal_best_f: Vec<S>,
    best: Option<(Vec<S>, S)>,
}

impl<S: Scalar> Pso<S> {
    pub fn new(problem: &ProblemInstance<S>, params: PsoParams, seed: u64) -> Result<Self, String> {
        params.validate()?;
        let clamp = S::lit(params.velocity_clamp);
        let vmax = problem
            .bounds()
            .iter()
            .map(|&(lo, hi)| (hi - lo) * clamp)
            .collect();
        Ok(Self {
            params,
            bounds: problem.bounds().to_vec(),
            vmax,
            rng: ChaCha8Rng::seed_from_u64(seed),
            positions: Vec::new(),
            velocities: Vec::new(),
            personal_best: Vec::new(),
            personal_best_f: Vec::new(),
            best: None,
        })
    }

    pub fn params(&self) -> &PsoParams {
        &self.params
    }

    /// Current particle positions (empty before the first step).
    pub fn positions(&self) -> &[Vec<S>] {
        &self.positions
    }

    fn offer_global(&mut self, i: usize) -> bool {
        let f = self.personal_best_f[i];
        if self.best.as_ref().map_or(true, |(_, b)| f < *b) {
            self.best = Some((self.personal_best[i].clone(), f));
            true
        } else {
            false
        }
    }

    fn initialize(&mut self, eval: &mut CountingEvaluator<'_, S>) -> bool {
        let dim = self.bounds.len();
        let mut improved = false;
        for i in 0..self.params.swarm_size {
            let x = sample_point(&mut self.rng, &self.bounds);
            let f = eval.evaluate(&x);
            self.positions.push(x.clone());
            self.velocities.push(vec![S::zero(); dim]);
            self.personal_best.push(x);
            self.personal_best_f.push(f);
            improved |= self.offer_global(i);
        }
        improved
    }

    fn advance(&mut self, eval: &mut CountingEvaluator<'_, S>) -> bool {
        let w = S::lit(self.params.inertia);
        let c1 = S::lit(self.params.cognitive);
        let c2 = S::lit(self.params.social);
        let mut improved = false;
        for i in 0..self.params.swarm_size {
            let global = &self.best.as_ref().expect("swarm initialized").0;
            for d in 0..self.bounds.len() {
                let r1 = S::lit(self.rng.gen::<f64>());
                let r2 = S::lit(self.rng.gen::<f64>());
                let x = self.positions[i][d];
                let v = w * self.velocities[i][d]
                    + c1 * r1 * (self.personal_best[i][d] - x)
                    + c2 * r2 * (global[d] - x);
                let v = v.max(-self.vmax[d]).min(self.vmax[d]);
                let (lo, hi) = self.bounds[d];
                self.velocities[i][d] = v;
                self.positions[i][d] = (x + v).max(lo).min(hi);
            }
            let f = eval.evaluate(&self.positions[i]);
            if f < self.personal_best_f[i] {
                self.personal_best_f[i] = f;
                self.personal_best[i].clone_from(&self.positions[i]);
                improved |= self.offer_global(i);
            }
        }
        improved
    }
}

impl<S: Scalar> Optimizer<S> for Pso<S> {
    fn evals_per_step(&self) -> u64 {
        self.params.swarm_size as u64
    }

    fn step(
        &mut self,
        eval: &mut CountingEvaluator<'_, S>,
    ) -> Result<StepReport<S>, OptimizerError> {
        let improved = if self.positions.is_empty() {
            self.initialize(eval)
        } else {
            self.advance(eval)
        };
        Ok(StepReport {
            evals_this_step: self.params.swarm_size as u64,
            new_best: if improved { self.best.clone() } else { None },
        })
    }

    fn best(&self) -> Option<(&[S], S)> {
        self.best.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.positions.clear();
        self.velocities.clear();
        self.personal_best.clear();
        self.personal_best_f.clear();
        self.best = None;
    }
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sample_point, Optimizer, OptimizerError, StepReport};
use crate::evaluator::CountingEvaluator;
use crate::problems::ProblemInstance;
use crate::Scalar;

/// Uniform sampling in the bounding box, one evaluation per step.
pub struct RandomSearch<S> {
    bounds: Vec<(S, S)>,
    rng: ChaCha8Rng,
    best: Option<(Vec<S>, S)>,
}

impl<S: Scalar> RandomSearch<S> {
    pub fn new(problem: &ProblemInstance<S>, seed: u64) -> Self {
        Self {
            bounds: problem.bounds().to_vec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            best: None,
        }
    }
}

impl<S: Scalar> Optimizer<S> for RandomSearch<S> {
    fn evals_per_step(&self) -> u64 {
        1
    }

    fn step(
        &mut self,
        eval: &mut CountingEvaluator<'_, S>,
    ) -> Result<StepReport<S>, OptimizerError> {
        let x = sample_point(&mut self.rng, &self.bounds);
        let f = eval.evaluate(&x);
        let improved = self.best.as_ref().map_or(true, |(_, b)| f < *b);
        if improved {
            self.best = Some((x, f));
        }
        Ok(StepReport {
            evals_this_step: 1,
            new_best: if improved { self.best.clone() } else { None },
        })
    }

    fn best(&self) -> Option<(&[S], S)> {
        self.best.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.best = None;
    }
}

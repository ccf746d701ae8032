//! Counting wrapper between optimizers and problems.
//!
//! Every evaluation goes through [`CountingEvaluator::evaluate`], which
//! clamps out-of-bounds queries, charges the clock and records improvement
//! events of the run-wide best-so-far value.

use crate::clock::{Clock, ClockError};
use crate::problems::ProblemInstance;
use crate::types::TrajectoryPoint;
use crate::Scalar;

pub struct CountingEvaluator<'a, S> {
    problem: &'a ProblemInstance<S>,
    clock: &'a mut Clock,
    evals: u64,
    clamped: u64,
    best: Option<S>,
    trajectory: Vec<TrajectoryPoint>,
    scratch: Vec<S>,
}

impl<'a, S: Scalar> CountingEvaluator<'a, S> {
    pub fn new(problem: &'a ProblemInstance<S>, clock: &'a mut Clock) -> Self {
        Self {
            problem,
            clock,
            evals: 0,
            clamped: 0,
            best: None,
            trajectory: Vec::new(),
            scratch: Vec::with_capacity(problem.dimension()),
        }
    }

    pub fn problem(&self) -> &ProblemInstance<S> {
        self.problem
    }

    /// Evaluates `x`, counting one function evaluation.
    ///
    /// # Panics
    ///
    /// If `x` does not have the problem's dimension.
    pub fn evaluate(&mut self, x: &[S]) -> S {
        assert_eq!(
            x.len(),
            self.problem.dimension(),
            "optimizer queried a point of the wrong dimension"
        );
        let f = if self.problem.in_bounds(x) {
            self.problem.evaluate_unchecked(x)
        } else {
            self.scratch.clear();
            self.scratch.extend_from_slice(x);
            self.problem.clamp_into(&mut self.scratch);
            self.clamped += 1;
            self.problem.evaluate_unchecked(&self.scratch)
        };
        self.evals += 1;
        self.clock.charge_evals(1);
        let improved = match self.best {
            None => !f.is_nan(),
            Some(b) => f < b,
        };
        if improved {
            self.best = Some(f);
            self.trajectory.push(TrajectoryPoint {
                elapsed: self.clock.now(),
                evals: self.evals,
                best_f: f.to_f64_lossy(),
            });
        }
        f
    }

    /// Charges algorithm overhead that is not tied to evaluations.
    pub fn charge_overhead(&mut self, seconds: f64) -> Result<(), ClockError> {
        self.clock.charge(seconds)
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    pub fn clock(&self) -> &Clock {
        self.clock
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }

    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    /// Run-wide best objective value seen so far.
    pub fn best(&self) -> Option<S> {
        self.best
    }

    pub fn trajectory(&self) -> &[TrajectoryPoint] {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Vec<TrajectoryPoint> {
        self.trajectory
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemInstance;

    #[test]
    fn counts_clamps_and_records_improvements() {
        let p = ProblemInstance::<f64>::from_id("sphere-d2").unwrap();
        let mut clock = Clock::virtual_clock(0.5);
        let mut ev = CountingEvaluator::new(&p, &mut clock);
        assert_eq!(ev.evaluate(&[1.0, 1.0]), 2.0);
        assert_eq!(ev.evaluate(&[2.0, 2.0]), 8.0);
        // clamped to (5.12, 0)
        assert_eq!(ev.evaluate(&[9.0, 0.0]), 5.12 * 5.12);
        assert_eq!(ev.evaluate(&[0.5, 0.0]), 0.25);
        assert_eq!(ev.evals(), 4);
        assert_eq!(ev.clamped(), 1);
        assert_eq!(ev.now(), 2.0);
        let t = ev.trajectory();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].elapsed, t[0].evals, t[0].best_f), (0.5, 1, 2.0));
        assert_eq!((t[1].elapsed, t[1].evals, t[1].best_f), (2.0, 4, 0.25));
    }
}

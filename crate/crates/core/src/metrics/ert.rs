use crate::types::{ErtResult, RunRecord};
use crate::Scalar;

/// Earliest elapsed time at which `record` met `q`, if within `budget`.
pub fn time_to_target(record: &RunRecord, q: f64, budget: f64) -> Option<f64> {
    record
        .trajectory
        .iter()
        .find(|p| p.best_f <= q)
        .map(|p| p.elapsed)
        .filter(|&t| t <= budget)
}

/// Time-to-target of a whole restart sequence.
///
/// Runs are laid end to end: a hit in run `k` is offset by the time used by
/// runs `0..k`. Hits after `budget` count as not reached.
pub fn repetition_time_to_target(runs: &[RunRecord], q: f64, budget: f64) -> Option<f64> {
    let mut offset = 0.0;
    for run in runs {
        if let Some(t) = time_to_target(run, q, f64::INFINITY) {
            let total = offset + t;
            return (total <= budget).then_some(total);
        }
        offset += run.time_used;
    }
    None
}

/// Expected running time: `sum_i min(t_i, T) / s`, with unsuccessful runs
/// contributing `T`. No successes gives `+inf`.
pub fn ert<S: Scalar>(target: S, times: &[Option<S>], budget: S) -> ErtResult<S> {
    let mut numerator = S::zero();
    let mut successes = 0usize;
    for t in times {
        match t {
            Some(t) => {
                numerator = numerator + t.min(budget);
                successes += 1;
            }
            None => numerator = numerator + budget,
        }
    }
    let runs = times.len();
    let ert = if successes == 0 {
        S::infinity()
    } else {
        numerator / S::lit(successes as f64)
    };
    let success_rate = if runs == 0 {
        S::zero()
    } else {
        S::lit(successes as f64) / S::lit(runs as f64)
    };
    ErtResult {
        target,
        ert,
        successes,
        runs,
        success_rate,
    }
}

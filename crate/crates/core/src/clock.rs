//! Run clocks: a monotonic real clock and a deterministic virtual clock.
//!
//! The virtual clock keeps integer nanoseconds so that sums of charges are
//! exact and replay is bit-identical. Charges are rounded to the nearest
//! nanosecond.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error("explicit charges are only allowed on a virtual clock")]
    ChargeOnRealClock,
    #[error("charge must be finite and >= 0, got {0}")]
    InvalidCharge(f64),
    #[error("clock.cost_per_eval must be finite and >= 0, got {0}")]
    InvalidEvalCost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClockMode {
    Real,
    Virtual {
        /// Seconds charged per function evaluation.
        cost_per_eval: f64,
    },
}

impl ClockMode {
    pub fn validate(&self) -> Result<(), ClockError> {
        match *self {
            ClockMode::Real => Ok(()),
            ClockMode::Virtual { cost_per_eval } => {
                if cost_per_eval.is_finite() && cost_per_eval >= 0.0 {
                    Ok(())
                } else {
                    Err(ClockError::InvalidEvalCost(cost_per_eval))
                }
            }
        }
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self, ClockMode::Virtual { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClockMode::Real => "real",
            ClockMode::Virtual { .. } => "virtual",
        }
    }
}

const NANOS_PER_SEC: f64 = 1e9;

/// Rounds seconds to whole nanoseconds.
pub fn seconds_to_nanos(seconds: f64) -> u64 {
    (seconds * NANOS_PER_SEC).round() as u64
}

pub fn nanos_to_seconds(nanos: u64) -> f64 {
    nanos as f64 / NANOS_PER_SEC
}

#[derive(Debug, Clone)]
enum Source {
    Real { origin: Instant },
    Virtual { elapsed_ns: u64, eval_cost_ns: u64 },
}

/// Clock owned by a single run. Time starts at zero on construction.
#[derive(Debug, Clone)]
pub struct Clock {
    source: Source,
}

impl Clock {
    pub fn new(mode: ClockMode) -> Self {
        let source = match mode {
            ClockMode::Real => Source::Real {
                origin: Instant::now(),
            },
            ClockMode::Virtual { cost_per_eval } => Source::Virtual {
                elapsed_ns: 0,
                eval_cost_ns: seconds_to_nanos(cost_per_eval),
            },
        };
        Self { source }
    }

    pub fn real() -> Self {
        Self::new(ClockMode::Real)
    }

    pub fn virtual_clock(cost_per_eval: f64) -> Self {
        Self::new(ClockMode::Virtual { cost_per_eval })
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self.source, Source::Virtual { .. })
    }

    /// Seconds since construction.
    pub fn now(&self) -> f64 {
        match &self.source {
            Source::Real { origin } => origin.elapsed().as_secs_f64(),
            Source::Virtual { elapsed_ns, .. } => nanos_to_seconds(*elapsed_ns),
        }
    }

    /// Exact virtual time, `None` on a real clock.
    pub fn now_nanos(&self) -> Option<u64> {
        match &self.source {
            Source::Real { .. } => None,
            Source::Virtual { elapsed_ns, .. } => Some(*elapsed_ns),
        }
    }

    /// Advances a virtual clock by `seconds`.
    pub fn charge(&mut self, seconds: f64) -> Result<(), ClockError> {
        if !(seconds.is_finite() && seconds >= 0.0) {
            return Err(ClockError::InvalidCharge(seconds));
        }
        match &mut self.source {
            Source::Real { .. } => Err(ClockError::ChargeOnRealClock),
            Source::Virtual { elapsed_ns, .. } => {
                *elapsed_ns += seconds_to_nanos(seconds);
                Ok(())
            }
        }
    }

    /// Charges the per-evaluation cost for `evals` evaluations; no-op on a real clock.
    pub fn charge_evals(&mut self, evals: u64) {
        if let Source::Virtual {
            elapsed_ns,
            eval_cost_ns,
        } = &mut self.source
        {
            *elapsed_ns += evals * *eval_cost_ns;
        }
    }

    /// Virtual cost of a step doing `evals` evaluations plus `overhead` seconds.
    pub fn step_cost_nanos(&self, evals: u64, overhead: f64) -> Option<u64> {
        match &self.source {
            Source::Real { .. } => None,
            Source::Virtual { eval_cost_ns, .. } => {
                Some(evals * eval_cost_ns + seconds_to_nanos(overhead))
            }
        }
    }
}

/// Smallest observable non-zero step of the monotonic clock, in seconds.
pub fn real_timer_resolution() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min((b - a).as_secs_f64());
    }
    best
}

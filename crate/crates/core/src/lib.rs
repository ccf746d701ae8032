//! Time-fair benchmarking of black-box optimizers.
//!
//! Every optimizer gets the same wall-clock budget per problem instance and
//! may spend it on as many independent restarts as it likes. Runs are logged
//! as improvement trajectories, from which the [`metrics`] module derives
//! expected running times, anytime ECDFs, median trajectories and
//! performance profiles. The [`report`] module persists logs, curve data and
//! a reproducibility manifest.
//!
//! Numeric code that does not touch the clock or the log format is generic
//! over [`Scalar`]; the aliases below fix it to `f64`, which is what the
//! protocol and CLI use.

pub mod analysis;
pub mod cli;
pub mod clock;
pub mod config;
pub mod evaluator;
pub mod metrics;
pub mod optimizers;
pub mod pipeline;
pub mod problems;
pub mod protocol;
pub mod report;
pub mod seeds;
pub mod simulate;
pub mod types;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by objectives, optimizers and metric kernels.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; every `f64` is representable (possibly rounded) in `f32`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub use clock::{Clock, ClockMode};
pub use problems::{FunctionKind, ProblemInstance};
pub use protocol::{ExperimentPlan, RepetitionOutcome};
pub use types::{
    Budget, CostMatrix, ErtResult, FirstHit, RunRecord, TargetKind, TargetSpec, Termination,
    TrajectoryPoint,
};

/// Problem instance evaluated in double precision.
pub type Problem = ProblemInstance<f64>;
/// Single-precision problem instance.
pub type Problem32 = ProblemInstance<f32>;
pub type Ert = ErtResult<f64>;
pub type Costs = CostMatrix<f64>;
pub type Profile = metrics::ProfileCurve<f64>;
pub type ProfileSet = metrics::ProfileSet<f64>;

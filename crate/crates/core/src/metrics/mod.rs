//! Quantitative analysis of run logs.
//!
//! All functions here are pure and operate on immutable inputs.

mod ecdf;
mod ert;
mod median;
mod profile;
mod ranksum;

use thiserror::Error;

pub use ecdf::{anytime_ecdf, log_time_grid, EcdfCurve, EcdfGroup};
pub use ert::{ert, repetition_time_to_target, time_to_target};
pub use median::{
    best_so_far_at, median_of, median_trajectory, BootstrapSettings, MedianCurve, MedianPoint,
};
pub use profile::{
    amortize_tuning, performance_profile, AllFailedPolicy, ProfileCurve, ProfileSet,
};
pub use ranksum::{rank_sum_test, RankSumMethod, RankSumResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("time grid must be strictly increasing")]
    UnorderedGrid,
    #[error("bootstrap needs >= 100 resamples, got {0}")]
    TooFewResamples(usize),
    #[error("confidence must be in (0, 1), got {0}")]
    BadConfidence(f64),
    #[error("rank-sum test needs >= 3 values per sample, got {0} and {1}")]
    SampleTooSmall(usize, usize),
    #[error("rank-sum samples must not contain NaN")]
    NanSample,
    #[error("unknown solver `{0}` in tuning report")]
    UnknownSolver(String),
    #[error("tuning time for `{0}` must be finite and >= 0")]
    BadTuningTime(String),
    #[error("grid needs >= 2 points and 0 < min_fraction < 1")]
    BadGridSpec,
}

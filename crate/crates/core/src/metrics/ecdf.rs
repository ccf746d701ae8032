use super::ert::repetition_time_to_target;
use super::MetricsError;
use crate::types::RunRecord;

/// Fraction of (repetition, target) pairs solved by each grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfCurve {
    pub time_grid: Vec<f64>,
    pub fraction: Vec<f64>,
    pub numerator: Vec<usize>,
    pub denominator: usize,
}

/// Repetitions on one instance together with that instance's thresholds.
#[derive(Debug, Clone)]
pub struct EcdfGroup<'a> {
    /// Each entry is one repetition's restart sequence.
    pub repetitions: Vec<&'a [RunRecord]>,
    pub targets: Vec<f64>,
    pub budget: f64,
}

/// `points` log-spaced times from `min_fraction * budget` to `budget`.
pub fn log_time_grid(budget: f64, points: usize, min_fraction: f64) -> Result<Vec<f64>, MetricsError> {
    if points < 2 || !(min_fraction > 0.0 && min_fraction < 1.0) || !(budget > 0.0) {
        return Err(MetricsError::BadGridSpec);
    }
    let lo = (min_fraction * budget).ln();
    let hi = budget.ln();
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| (lo + step * i as f64).exp()).collect();
    grid[points - 1] = budget;
    Ok(grid)
}

pub fn anytime_ecdf(groups: &[EcdfGroup<'_>], time_grid: &[f64]) -> Result<EcdfCurve, MetricsError> {
    if groups.is_empty() {
        return Err(MetricsError::Empty("ECDF groups"));
    }
    if time_grid.is_empty() {
        return Err(MetricsError::Empty("time grid"));
    }
    if time_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MetricsError::UnorderedGrid);
    }
    let mut hits = Vec::new();
    let mut denominator = 0usize;
    for g in groups {
        for reps in &g.repetitions {
            for &q in &g.targets {
                denominator += 1;
                if let Some(t) = repetition_time_to_target(reps, q, g.budget) {
                    hits.push(t);
                }
            }
        }
    }
    hits.sort_by(f64::total_cmp);
    let numerator: Vec<usize> = time_grid
        .iter()
        .map(|&t| hits.partition_point(|&h| h <= t))
        .collect();
    let fraction = numerator
        .iter()
        .map(|&n| if denominator == 0 { 0.0 } else { n as f64 / denominator as f64 })
        .collect();
    Ok(EcdfCurve {
        time_grid: time_grid.to_vec(),
        fraction,
        numerator,
        denominator,
    })
}

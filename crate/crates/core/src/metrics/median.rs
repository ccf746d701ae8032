use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MetricsError;
use crate::types::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSettings {
    pub samples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            samples: 1000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

/// Median best-so-far at one grid time; `None` means no repetition had a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianPoint {
    pub time: f64,
    pub median: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianCurve {
    pub points: Vec<MedianPoint>,
}

/// Best-so-far value of a restart sequence at cumulative time `t`, `+inf` before the first evaluation.
pub fn best_so_far_at(runs: &[RunRecord], t: f64) -> f64 {
    let mut offset = 0.0;
    let mut best = f64::INFINITY;
    for run in runs {
        if offset > t {
            break;
        }
        for p in &run.trajectory {
            if offset + p.elapsed > t {
                break;
            }
            best = best.min(p.best_f);
        }
        offset += run.time_used;
    }
    best
}

/// Median allowing `+inf` entries; the mean of the two middle values for even counts.
pub fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a.is_infinite() || b.is_infinite() {
            f64::INFINITY
        } else {
            0.5 * (a + b)
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Nearest-rank quantile of sorted values.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Median anytime curve over repetitions with percentile-bootstrap intervals.
///
/// Each bootstrap replicate resamples whole repetitions with replacement and
/// is shared across grid points.
pub fn median_trajectory(
    repetitions: &[&[RunRecord]],
    time_grid: &[f64],
    settings: BootstrapSettings,
) -> Result<MedianCurve, MetricsError> {
    if repetitions.is_empty() {
        return Err(MetricsError::Empty("repetitions"));
    }
    if settings.samples < 100 {
        return Err(MetricsError::TooFewResamples(settings.samples));
    }
    if !(settings.confidence > 0.0 && settings.confidence < 1.0) {
        return Err(MetricsError::BadConfidence(settings.confidence));
    }
    if time_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MetricsError::UnorderedGrid);
    }
    let n = repetitions.len();
    let values: Vec<Vec<f64>> = time_grid
        .iter()
        .map(|&t| repetitions.iter().map(|r| best_so_far_at(r, t)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let resamples: Vec<Vec<usize>> = (0..settings.samples)
        .map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect())
        .collect();

    let alpha = 1.0 - settings.confidence;
    let mut scratch = vec![0.0; n];
    let mut boot = vec![0.0; settings.samples];
    let points = time_grid
        .iter()
        .zip(&values)
        .map(|(&time, vals)| {
            scratch.copy_from_slice(vals);
            let median = median_of(&mut scratch);
            for (b, idx) in boot.iter_mut().zip(&resamples) {
                for (s, &i) in scratch.iter_mut().zip(idx) {
                    *s = vals[i];
                }
                *b = median_of(&mut scratch);
            }
            boot.sort_by(f64::total_cmp);
            MedianPoint {
                time,
                median: finite(median),
                ci_lo: finite(quantile_sorted(&boot, alpha / 2.0)),
                ci_hi: finite(quantile_sorted(&boot, 1.0 - alpha / 2.0)),
            }
        })
        .collect();
    Ok(MedianCurve { points })
}

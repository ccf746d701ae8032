use serde::Serialize;
use statrs::function::erf::erfc;

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankSumMethod {
    /// Full enumeration of rank assignments (n_a + n_b <= 20).
    Exact,
    /// Normal approximation with tie and continuity corrections.
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankSumResult {
    /// `min(U_a, U_b)`.
    pub statistic: f64,
    pub p_value: f64,
    pub method: RankSumMethod,
    /// Every value in both samples is equal.
    pub degenerate: bool,
}

const EXACT_LIMIT: usize = 20;

/// Doubled mid-ranks of the pooled sample, in input order, plus tie group sizes.
fn doubled_ranks(pooled: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; n];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share rank (start + 1 + end) / 2
        let doubled = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Two-sided Mann-Whitney U test.
pub fn rank_sum_test(sample_a: &[f64], sample_b: &[f64]) -> Result<RankSumResult, MetricsError> {
    let (na, nb) = (sample_a.len(), sample_b.len());
    if na < 3 || nb < 3 {
        return Err(MetricsError::SampleTooSmall(na, nb));
    }
    if sample_a.iter().chain(sample_b).any(|v| v.is_nan()) {
        return Err(MetricsError::NanSample);
    }
    let n = na + nb;
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let (ranks, ties) = doubled_ranks(&pooled);
    let method = if n <= EXACT_LIMIT {
        RankSumMethod::Exact
    } else {
        RankSumMethod::NormalApprox
    };
    if ties.len() == 1 {
        return Ok(RankSumResult {
            statistic: (na * nb) as f64 / 2.0,
            p_value: 1.0,
            method,
            degenerate: true,
        });
    }

    let doubled_sum_a: u64 = ranks[..na].iter().sum();
    let doubled_u_a = doubled_sum_a as f64 - (na * (na + 1)) as f64;
    let u_a = doubled_u_a / 2.0;
    let u_b = (na * nb) as f64 - u_a;
    let statistic = u_a.min(u_b);

    let p_value = match method {
        RankSumMethod::Exact => exact_p(&ranks, na, doubled_sum_a),
        RankSumMethod::NormalApprox => {
            let nf = n as f64;
            let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
            let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
            let mean = (na * nb) as f64 / 2.0;
            let z = ((u_a - mean).abs() - 0.5).max(0.0) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2).min(1.0)
        }
    };
    Ok(RankSumResult {
        statistic,
        p_value,
        method,
        degenerate: false,
    })
}

/// Fraction of size-`na` rank subsets at least as far from the mean rank sum as observed.
fn exact_p(ranks: &[u64], na: usize, observed: u64) -> f64 {
    let total: u64 = ranks.iter().sum();
    let max = total as usize;
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0u64; max + 1]; na + 1];
    counts[0][0] = 1;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=na).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let (prev, cur) = (&lower[k - 1], &mut upper[0]);
            for s in (r..=max).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let n = ranks.len() as i64;
    // mean doubled rank sum is na * (n + 1)
    let centre = na as i64 * (n + 1);
    let observed_dev = (observed as i64 - centre).abs();
    let row = &counts[na];
    let all: u64 = row.iter().sum();
    let extreme: u64 = row
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as i64 - centre).abs() >= observed_dev)
        .map(|(_, c)| c)
        .sum();
    extreme as f64 / all as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force enumeration over index subsets.
    fn brute_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let (ranks, _) = doubled_ranks(&pooled);
        let n = pooled.len();
        let na = a.len();
        let centre = (na * (n + 1)) as i64;
        let obs: i64 = ranks[..na].iter().sum::<u64>() as i64;
        let (mut hit, mut all) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            let s: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i] as i64).sum();
            all += 1;
            if (s - centre).abs() >= (obs - centre).abs() {
                hit += 1;
            }
        }
        hit as f64 / all as f64
    }

    #[test]
    fn separated_three_by_three() {
        let r = rank_sum_test(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, RankSumMethod::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples() {
        let r = rank_sum_test(&[4.0, 4.0, 4.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(r.degenerate);
        let r = rank_sum_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn order_does_not_matter() {
        let a = [3.1, 0.2, 5.5, 2.2, 9.0];
        let b = [1.0, 7.7, 6.1, 4.4];
        let p = rank_sum_test(&a, &b).unwrap().p_value;
        let mut a2 = a;
        a2.reverse();
        let mut b2 = b;
        b2.rotate_left(2);
        assert_eq!(rank_sum_test(&a2, &b2).unwrap().p_value, p);
        assert_eq!(rank_sum_test(&b, &a).unwrap().p_value, p);
    }

    #[test]
    fn exact_matches_brute_force_with_ties() {
        let cases: [(&[f64], &[f64]); 3] = [
            (&[1.0, 2.0, 2.0, 5.0], &[2.0, 3.0, 6.0, 6.0, 7.0]),
            (&[0.5, 0.5, 0.5], &[0.5, 1.0, 1.5]),
            (&[9.0, 1.0, 4.0, 4.0, 3.0, 8.0], &[2.0, 7.0, 7.0, 0.0, 6.0, 5.0]),
        ];
        for (a, b) in cases {
            let r = rank_sum_test(a, b).unwrap();
            assert!((r.p_value - brute_p(a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn large_samples_use_normal_approximation() {
        let a: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..15).map(|i| i as f64 + 0.5).collect();
        let r = rank_sum_test(&a, &b).unwrap();
        assert_eq!(r.method, RankSumMethod::NormalApprox);
        assert!(r.p_value > 0.5 && r.p_value <= 1.0);
        let far: Vec<f64> = (0..15).map(|i| i as f64 + 100.0).collect();
        let r = rank_sum_test(&a, &far).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value < 1e-5);
    }

    #[test]
    fn small_samples_rejected() {
        assert!(rank_sum_test(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(rank_sum_test(&[1.0, f64::NAN, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }
}

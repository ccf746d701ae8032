use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::types::CostMatrix;
use crate::Scalar;

/// How instances on which every solver failed enter the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllFailedPolicy {
    /// Drop them from the instance count.
    #[default]
    Exclude,
    /// Keep them; no solver ever succeeds on them.
    CountAsFailure,
}

/// Step function `rho(tau)` of one solver.
///
/// `ratios[k]` are the distinct finite ratios in increasing order and
/// `rho[k]` the value on `[ratios[k], ratios[k + 1])`; below `ratios[0]` the
/// profile is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve<S> {
    pub solver_id: String,
    pub ratios: Vec<S>,
    pub rho: Vec<S>,
}

impl<S: Scalar> ProfileCurve<S> {
    pub fn rho_at(&self, tau: S) -> S {
        let k = self.ratios.partition_point(|&r| r <= tau);
        if k == 0 {
            S::zero()
        } else {
            self.rho[k - 1]
        }
    }

    /// Limit of `rho(tau)` as `tau` grows.
    pub fn asymptote(&self) -> S {
        self.rho.last().copied().unwrap_or_else(S::zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet<S> {
    pub curves: Vec<ProfileCurve<S>>,
    /// Instances counted in the denominator.
    pub instances_used: usize,
    /// All-failed instances dropped under [`AllFailedPolicy::Exclude`].
    pub excluded_rows: usize,
}

/// Dolan-More performance profiles over a cost matrix.
pub fn performance_profile<S: Scalar>(costs: &CostMatrix<S>, policy: AllFailedPolicy) -> ProfileSet<S> {
    let solvers = costs.solvers().len();
    let mut ratios: Vec<Vec<S>> = vec![Vec::new(); solvers];
    let mut used = 0usize;
    let mut excluded = 0usize;
    for (p, row) in costs.rows().iter().enumerate() {
        if costs.row_all_failed(p) {
            match policy {
                AllFailedPolicy::Exclude => {
                    excluded += 1;
                    continue;
                }
                AllFailedPolicy::CountAsFailure => {
                    used += 1;
                    continue;
                }
            }
        }
        used += 1;
        let best = row.iter().copied().fold(S::infinity(), S::min);
        for (s, &c) in row.iter().enumerate() {
            if c.is_finite() {
                ratios[s].push(c / best);
            }
        }
    }
    let denom = S::lit(used as f64);
    let curves = costs
        .solvers()
        .iter()
        .zip(ratios)
        .map(|(id, mut r)| {
            r.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
            let mut taus = Vec::new();
            let mut rho = Vec::new();
            for (i, &tau) in r.iter().enumerate() {
                let count = S::lit((i + 1) as f64) / denom;
                if taus.last() == Some(&tau) {
                    *rho.last_mut().expect("paired") = count;
                } else {
                    taus.push(tau);
                    rho.push(count);
                }
            }
            ProfileCurve {
                solver_id: id.clone(),
                ratios: taus,
                rho,
            }
        })
        .collect();
    ProfileSet {
        curves,
        instances_used: used,
        excluded_rows: excluded,
    }
}

/// Adds each solver's tuning time, spread evenly over the instances, to its finite costs.
pub fn amortize_tuning<S: Scalar>(
    costs: &CostMatrix<S>,
    tuning: &BTreeMap<String, S>,
) -> Result<CostMatrix<S>, MetricsError> {
    let n = S::lit(costs.instances().len().max(1) as f64);
    let mut surcharge = vec![S::zero(); costs.solvers().len()];
    for (solver, &t) in tuning {
        let s = costs
            .solver_index(solver)
            .ok_or_else(|| MetricsError::UnknownSolver(solver.clone()))?;
        if !(t.is_finite() && t >= S::zero()) {
            return Err(MetricsError::BadTuningTime(solver.clone()));
        }
        surcharge[s] = t / n;
    }
    Ok(costs.map_finite(|_, s, c| c + surcharge[s]))
}

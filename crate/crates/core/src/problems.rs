//! Continuous test functions with known optima.
//!
//! Instances are addressed by ids of the form `<name>-d<dimension>`, for
//! example `rastrigin-d10`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown problem id `{0}` (expected e.g. `rastrigin-d10`)")]
    UnknownId(String),
    #[error("dimension must be >= {min} for {name}, got {got}")]
    BadDimension {
        name: &'static str,
        min: usize,
        got: usize,
    },
    #[error("bound {index} is invalid: lower must be < upper and both finite")]
    BadBounds { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    Sphere,
    Rastrigin,
    Rosenbrock,
    Ackley,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 4] = [
        FunctionKind::Sphere,
        FunctionKind::Rastrigin,
        FunctionKind::Rosenbrock,
        FunctionKind::Ackley,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FunctionKind::Sphere => "sphere",
            FunctionKind::Rastrigin => "rastrigin",
            FunctionKind::Rosenbrock => "rosenbrock",
            FunctionKind::Ackley => "ackley",
        }
    }

    pub fn default_bounds(&self) -> (f64, f64) {
        match self {
            FunctionKind::Sphere | FunctionKind::Rastrigin => (-5.12, 5.12),
            FunctionKind::Rosenbrock => (-5.0, 10.0),
            FunctionKind::Ackley => (-32.768, 32.768),
        }
    }

    fn min_dimension(&self) -> usize {
        match self {
            FunctionKind::Rosenbrock => 2,
            _ => 1,
        }
    }

    fn optimum_coordinate(&self) -> f64 {
        match self {
            FunctionKind::Rosenbrock => 1.0,
            _ => 0.0,
        }
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            FunctionKind::Sphere => sphere(x),
            FunctionKind::Rastrigin => rastrigin(x),
            FunctionKind::Rosenbrock => rosenbrock(x),
            FunctionKind::Ackley => ackley(x),
        }
    }
}

impl FromStr for FunctionKind {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FunctionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProblemError::UnknownId(s.to_string()))
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn sphere<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::zero(), |acc, &v| acc + v * v)
}

/// `10 d + sum(x_i^2 - 10 cos(2 pi x_i))`.
pub fn rastrigin<S: Scalar>(x: &[S]) -> S {
    let a = S::lit(10.0);
    let two_pi = S::lit(std::f64::consts::TAU);
    let n = S::lit(x.len() as f64);
    a * n
        + x.iter()
            .fold(S::zero(), |acc, &v| acc + (v * v - a * (two_pi * v).cos()))
}

/// Chained Rosenbrock, minimum 0 at `(1, ..., 1)`.
pub fn rosenbrock<S: Scalar>(x: &[S]) -> S {
    let hundred = S::lit(100.0);
    x.windows(2).fold(S::zero(), |acc, w| {
        let a = w[1] - w[0] * w[0];
        let b = S::one() - w[0];
        acc + hundred * a * a + b * b
    })
}

pub fn ackley<S: Scalar>(x: &[S]) -> S {
    let n = S::lit(x.len() as f64);
    let two_pi = S::lit(std::f64::consts::TAU);
    let sum_sq = x.iter().fold(S::zero(), |acc, &v| acc + v * v);
    let sum_cos = x.iter().fold(S::zero(), |acc, &v| acc + (two_pi * v).cos());
    let e = S::lit(std::f64::consts::E);
    -S::lit(20.0) * (-S::lit(0.2) * (sum_sq / n).sqrt()).exp() - (sum_cos / n).exp()
        + S::lit(20.0)
        + e
}

pub type CustomObjective<S> = Arc<dyn Fn(&[S]) -> S + Send + Sync>;

#[derive(Clone)]
enum Objective<S> {
    Builtin(FunctionKind),
    Custom(CustomObjective<S>),
}

/// A bounded minimization problem.
#[derive(Clone)]
pub struct ProblemInstance<S> {
    id: String,
    bounds: Vec<(S, S)>,
    f_opt: Option<S>,
    x_opt: Option<Vec<S>>,
    objective: Objective<S>,
}

impl<S: Scalar> fmt::Debug for ProblemInstance<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("id", &self.id)
            .field("dimension", &self.bounds.len())
            .field("f_opt", &self.f_opt)
            .finish_non_exhaustive()
    }
}

impl<S: Scalar> ProblemInstance<S> {
    pub fn builtin(kind: FunctionKind, dimension: usize) -> Result<Self, ProblemError> {
        if dimension < kind.min_dimension() {
            return Err(ProblemError::BadDimension {
                name: kind.name(),
                min: kind.min_dimension(),
                got: dimension,
            });
        }
        let (lo, hi) = kind.default_bounds();
        Ok(Self {
            id: format!("{}-d{}", kind.name(), dimension),
            bounds: vec![(S::lit(lo), S::lit(hi)); dimension],
            f_opt: Some(S::zero()),
            x_opt: Some(vec![S::lit(kind.optimum_coordinate()); dimension]),
            objective: Objective::Builtin(kind),
        })
    }

    /// Resolves a catalog id such as `ackley-d5`.
    pub fn from_id(id: &str) -> Result<Self, ProblemError> {
        let unknown = || ProblemError::UnknownId(id.to_string());
        let (name, dim) = id.rsplit_once("-d").ok_or_else(unknown)?;
        let kind: FunctionKind = name.parse().map_err(|_| unknown())?;
        let dimension: usize = dim.parse().map_err(|_| unknown())?;
        Self::builtin(kind, dimension)
    }

    /// Wraps an arbitrary deterministic objective.
    pub fn custom(
        id: impl Into<String>,
        bounds: Vec<(S, S)>,
        f_opt: Option<S>,
        x_opt: Option<Vec<S>>,
        f: impl Fn(&[S]) -> S + Send + Sync + 'static,
    ) -> Result<Self, ProblemError> {
        if bounds.is_empty() {
            return Err(ProblemError::BadDimension {
                name: "custom",
                min: 1,
                got: 0,
            });
        }
        for (index, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ProblemError::BadBounds { index });
            }
        }
        Ok(Self {
            id: id.into(),
            bounds,
            f_opt,
            x_opt,
            objective: Objective::Custom(Arc::new(f)),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(S, S)] {
        &self.bounds
    }

    pub fn f_opt(&self) -> Option<S> {
        self.f_opt
    }

    pub fn x_opt(&self) -> Option<&[S]> {
        self.x_opt.as_deref()
    }

    pub fn kind(&self) -> Option<FunctionKind> {
        match &self.objective {
            Objective::Builtin(k) => Some(*k),
            Objective::Custom(_) => None,
        }
    }

    pub fn evaluate(&self, x: &[S]) -> Result<S, ProblemError> {
        if x.len() != self.dimension() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[S]) -> S {
        match &self.objective {
            Objective::Builtin(k) => k.eval(x),
            Objective::Custom(f) => f(x),
        }
    }

    pub fn in_bounds(&self, x: &[S]) -> bool {
        x.iter()
            .zip(&self.bounds)
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Clamps `x` into the box; returns whether any coordinate moved.
    pub fn clamp_into(&self, x: &mut [S]) -> bool {
        let mut moved = false;
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            let c = v.max(lo).min(hi);
            if c != *v {
                *v = c;
                moved = true;
            }
        }
        moved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rastrigin_values() {
        assert_eq!(rastrigin(&[0.0f64; 7]), 0.0);
        assert_eq!(rastrigin(&[1.0f64, 0.0]), 1.0);
    }

    #[test]
    fn sphere_and_rosenbrock() {
        assert_eq!(sphere(&[1.0f64, 1.0, 1.0]), 3.0);
        assert_eq!(rosenbrock(&[1.0f64, 1.0]), 0.0);
        // 100 (1 - 0)^2 + (1 - 0)^2
        assert_eq!(rosenbrock(&[0.0f64, 1.0]), 101.0);
    }

    #[test]
    fn known_optima_all_dimensions() {
        for kind in FunctionKind::ALL {
            for d in [2, 5, 10] {
                let p = Problem::builtin(kind, d).unwrap();
                let f = p.evaluate(p.x_opt().unwrap()).unwrap();
                assert!((f - p.f_opt().unwrap()).abs() <= 1e-12, "{} {f}", p.id());
                let p32 = ProblemInstance::<f32>::builtin(kind, d).unwrap();
                let f32v = p32.evaluate(p32.x_opt().unwrap()).unwrap();
                assert!(f32v.abs() <= 1e-5, "{} {f32v}", p32.id());
            }
        }
    }

    type Problem = ProblemInstance<f64>;

    #[test]
    fn ids_round_trip() {
        let p = Problem::from_id("rastrigin-d10").unwrap();
        assert_eq!(p.id(), "rastrigin-d10");
        assert_eq!(p.dimension(), 10);
        assert_eq!(p.bounds()[0], (-5.12, 5.12));
        assert_eq!(Problem::from_id("ackley-d3").unwrap().bounds()[2].1, 32.768);
        assert!(Problem::from_id("rastrigin").is_err());
        assert!(Problem::from_id("nope-d3").is_err());
        assert!(Problem::from_id("rosenbrock-d1").is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let p = Problem::from_id("sphere-d3").unwrap();
        assert_eq!(
            p.evaluate(&[1.0, 2.0]),
            Err(ProblemError::DimensionMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn clamp_reports_movement() {
        let p = Problem::from_id("sphere-d2").unwrap();
        let mut x = [9.0, 0.5];
        assert!(p.clamp_into(&mut x));
        assert_eq!(x, [5.12, 0.5]);
        assert!(!p.clamp_into(&mut x));
    }

    #[test]
    fn evaluation_is_bit_deterministic() {
        let p = Problem::from_id("ackley-d10").unwrap();
        let x: Vec<f64> = (0..10).map(|i| 0.37 * i as f64 - 1.1).collect();
        let a = p.evaluate(&x).unwrap();
        let b = p.evaluate(&x).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn optimum_lower_bounds_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for kind in FunctionKind::ALL {
            let p = Problem::builtin(kind, 5).unwrap();
            for _ in 0..500 {
                let x: Vec<f64> = p.bounds().iter().map(|&(l, h)| rng.gen_range(l..h)).collect();
                assert!(p.evaluate(&x).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn custom_bounds_validated() {
        assert!(Problem::custom("c", vec![(1.0, 1.0)], None, None, |_| 0.0).is_err());
        let c = Problem::custom("c", vec![(0.0, 1.0)], Some(0.0), None, |x| x[0]).unwrap();
        assert_eq!(c.evaluate(&[0.25]).unwrap(), 0.25);
    }
}

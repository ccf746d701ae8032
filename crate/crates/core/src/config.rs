//! Experiment configuration files.
//!
//! A config is one TOML document. Unknown keys are rejected. After command
//! line overrides are merged, [`ExperimentConfig::effective`] fills in every
//! default so the dumped file describes the experiment completely.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::ClockMode;
use crate::metrics::{AllFailedPolicy, BootstrapSettings};
use crate::optimizers::{AlgorithmKind, AlgorithmSpec};
use crate::protocol::ExperimentPlan;
use crate::seeds::split_seed;
use crate::types::{Budget, DomainError, TargetKind, TargetSpec};

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.toml";

/// Sub-seed stream of the master seed used for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = 0xB007;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Seconds per (algorithm, instance, repetition).
    pub wall_time_limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    pub kind: TargetKind,
    pub values: Vec<f64>,
}

impl Default for TargetsConfig {
    fn default() -> Self {
        Self {
            kind: TargetKind::Relative,
            values: TargetSpec::DEFAULT_RELATIVE_LADDER.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub grid_points: usize,
    /// First grid time as a fraction of the budget.
    pub grid_min_fraction: f64,
    pub bootstrap_samples: usize,
    pub confidence: f64,
    /// Derived from the master seed when absent (63 bits, so it fits a TOML integer).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_seed: Option<u64>,
    pub all_failed: AllFailedPolicy,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        let b = BootstrapSettings::default();
        Self {
            grid_points: 64,
            grid_min_fraction: 1e-3,
            bootstrap_samples: b.samples,
            confidence: b.confidence,
            bootstrap_seed: None,
            all_failed: AllFailedPolicy::default(),
        }
    }
}

impl MetricsConfig {
    pub fn bootstrap(&self, master_seed: u64) -> BootstrapSettings {
        BootstrapSettings {
            samples: self.bootstrap_samples,
            confidence: self.confidence,
            seed: self
                .bootstrap_seed
                .unwrap_or_else(|| split_seed(master_seed, BOOTSTRAP_STREAM) >> 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    /// Free-text description of how parameters were chosen.
    pub method: String,
    /// Total tuning seconds per algorithm id.
    pub seconds: BTreeMap<String, f64>,
    #[serde(default = "default_amortization")]
    pub amortization: String,
}

pub const EVEN_PER_INSTANCE: &str = "even_per_instance";

fn default_amortization() -> String {
    EVEN_PER_INSTANCE.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub master_seed: u64,
    pub repetitions: u32,
    #[serde(default)]
    pub parallel: bool,
    pub instances: Vec<String>,
    pub budget: BudgetConfig,
    pub clock: ClockMode,
    #[serde(default)]
    pub targets: TargetsConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningConfig>,
    pub algorithms: Vec<AlgorithmSpec>,
}

/// Command line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub parallel: bool,
    pub amortize: Vec<(String, f64)>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, ConfigError> {
        if let Some(seed) = o.seed {
            self.master_seed = seed;
            // A config-pinned bootstrap seed is kept; a derived one follows the new master.
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = Some(dir.clone());
        }
        self.parallel |= o.parallel;
        if !o.amortize.is_empty() {
            let tuning = self.tuning.get_or_insert_with(|| TuningConfig {
                method: "declared on the command line".into(),
                seconds: BTreeMap::new(),
                amortization: default_amortization(),
            });
            for (solver, secs) in &o.amortize {
                tuning.seconds.insert(solver.clone(), *secs);
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.master_seed > i64::MAX as u64 {
            return Err(invalid(
                "master_seed",
                format!("must be <= {} to fit a TOML integer", i64::MAX),
            ));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions", "must be >= 1"));
        }
        if self.instances.is_empty() {
            return Err(invalid("instances", "must list at least one instance"));
        }
        Budget::new(self.budget.wall_time_limit, self.budget.eval_cap).map_err(|e| match e {
            DomainError::InvalidEvalCap => invalid("budget.eval_cap", "must be >= 1"),
            _ => invalid(
                "budget.wall_time_limit",
                format!("must be finite and > 0, got {}", self.budget.wall_time_limit),
            ),
        })?;
        self.clock
            .validate()
            .map_err(|e| invalid("clock.cost_per_eval", e))?;
        if self.parallel && !self.clock.is_virtual() {
            return Err(invalid(
                "parallel",
                "parallel execution is only allowed with the virtual clock",
            ));
        }
        TargetSpec::new(self.targets.kind, self.targets.values.clone())
            .map_err(|e| invalid("targets.values", e))?;

        let m = &self.metrics;
        if m.grid_points < 2 {
            return Err(invalid("metrics.grid_points", "must be >= 2"));
        }
        if !(m.grid_min_fraction > 0.0 && m.grid_min_fraction < 1.0) {
            return Err(invalid("metrics.grid_min_fraction", "must be in (0, 1)"));
        }
        if m.bootstrap_samples < 100 {
            return Err(invalid("metrics.bootstrap_samples", "must be >= 100"));
        }
        if !(m.confidence > 0.0 && m.confidence < 1.0) {
            return Err(invalid("metrics.confidence", "must be in (0, 1)"));
        }
        if m.bootstrap_seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(invalid("metrics.bootstrap_seed", "must fit a TOML integer"));
        }

        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "must declare at least one algorithm"));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            a.validate(&self.clock)
                .map_err(|e| invalid(format!("algorithms[{i}]"), e))?;
            if self.algorithms[..i].iter().any(|b| b.id == a.id) {
                return Err(invalid(
                    format!("algorithms[{i}].id"),
                    format!("duplicate id `{}`", a.id),
                ));
            }
        }
        if let Some(t) = &self.tuning {
            if t.method.trim().is_empty() {
                return Err(invalid("tuning.method", "must not be empty"));
            }
            if t.amortization != EVEN_PER_INSTANCE {
                return Err(invalid(
                    "tuning.amortization",
                    format!("unsupported scheme `{}` (supported: {EVEN_PER_INSTANCE})", t.amortization),
                ));
            }
            for (solver, secs) in &t.seconds {
                if !self.algorithms.iter().any(|a| &a.id == solver) {
                    return Err(invalid(
                        format!("tuning.seconds.{solver}"),
                        "not a declared algorithm id",
                    ));
                }
                if !(secs.is_finite() && *secs >= 0.0) {
                    return Err(invalid(
                        format!("tuning.seconds.{solver}"),
                        format!("must be finite and >= 0, got {secs}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The config with all defaults made explicit and the output location dropped.
    pub fn effective(&self) -> Self {
        let mut c = self.clone();
        c.output_dir = None;
        c.metrics.bootstrap_seed = Some(self.metrics.bootstrap(self.master_seed).seed);
        c.algorithms = c
            .algorithms
            .into_iter()
            .map(|a| {
                let mut a = a.normalized();
                if a.kind == AlgorithmKind::RandomSearch {
                    a.pso = None;
                }
                a
            })
            .collect();
        c
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn plan(&self) -> Result<ExperimentPlan, ConfigError> {
        let budget = Budget::new(self.budget.wall_time_limit, self.budget.eval_cap)
            .map_err(|e| invalid("budget", e))?;
        let targets = TargetSpec::new(self.targets.kind, self.targets.values.clone())
            .map_err(|e| invalid("targets", e))?;
        let plan = ExperimentPlan {
            algorithms: self.algorithms.clone(),
            instances: self.instances.clone(),
            budget,
            targets,
            repetitions: self.repetitions,
            master_seed: self.master_seed,
            clock: self.clock,
        };
        plan.resolve::<f64>().map_err(|e| invalid("plan", e))?;
        Ok(plan)
    }

    pub fn tuning_seconds(&self) -> BTreeMap<String, f64> {
        self.tuning
            .as_ref()
            .map(|t| t.seconds.clone())
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
master_seed = 7
repetitions = 3
instances = ["sphere-d2"]

[budget]
wall_time_limit = 2.0

[clock]
mode = "virtual"
cost_per_eval = 0.001

[[algorithms]]
id = "pso"
kind = "pso"
max_iterations = 50
"#;

    fn error_field(text: &str) -> String {
        match ExperimentConfig::from_toml_str(text) {
            Err(ConfigError::Invalid { field, .. }) => field,
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_fills_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.targets, TargetsConfig::default());
        assert_eq!(c.metrics.grid_points, 64);
        let plan = c.plan().unwrap();
        assert_eq!(plan.budget.wall_time_limit(), 2.0);
        assert_eq!(plan.repetitions, 3);
    }

    #[test]
    fn non_positive_budget_names_the_field() {
        let text = BASE.replace("wall_time_limit = 2.0", "wall_time_limit = 0.0");
        assert_eq!(error_field(&text), "budget.wall_time_limit");
        let text = BASE.replace("wall_time_limit = 2.0", "wall_time_limit = -3.0");
        let msg = ExperimentConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(msg.contains("budget.wall_time_limit"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            format!("{BASE}\nrepetitons = 4\n"),
            BASE.replace("cost_per_eval = 0.001", "cost_per_eval = 0.001\ncost = 1"),
            BASE.replace("max_iterations = 50", "max_iterations = 50\nswarm = 3"),
        ] {
            assert!(matches!(
                ExperimentConfig::from_toml_str(&text),
                Err(ConfigError::Parse(_))
            ));
        }
    }

    #[test]
    fn other_fields_are_named() {
        assert_eq!(error_field(&BASE.replace("repetitions = 3", "repetitions = 0")), "repetitions");
        assert_eq!(
            error_field(&format!("{BASE}\n[targets]\nkind = \"absolute\"\nvalues = [1.0, 2.0]\n")),
            "targets.values"
        );
        assert_eq!(
            error_field(&format!("{BASE}\n[tuning]\nmethod = \"grid\"\n[tuning.seconds]\nother = 1.0\n")),
            "tuning.seconds.other"
        );
        assert_eq!(
            error_field(&BASE.replace("mode = \"virtual\"\ncost_per_eval = 0.001", "mode = \"real\"")
                .replace("repetitions = 3", "repetitions = 3\nparallel = true")),
            "parallel"
        );
    }

    #[test]
    fn effective_config_round_trips() {
        let c = ExperimentConfig::from_toml_str(BASE)
            .unwrap()
            .apply(&Overrides {
                seed: Some(11),
                amortize: vec![("pso".into(), 100.0)],
                ..Overrides::default()
            })
            .unwrap()
            .effective();
        assert_eq!(c.master_seed, 11);
        assert!(c.algorithms[0].pso.is_some());
        assert_eq!(c.tuning.as_ref().unwrap().seconds["pso"], 100.0);
        let text = c.to_toml().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.effective(), c);
    }

    #[test]
    fn seed_override_moves_derived_bootstrap_seed() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        let a = c.effective().metrics.bootstrap_seed;
        let b = c
            .apply(&Overrides {
                seed: Some(8),
                ..Overrides::default()
            })
            .unwrap()
            .effective()
            .metrics
            .bootstrap_seed;
        assert_ne!(a, b);
    }
}

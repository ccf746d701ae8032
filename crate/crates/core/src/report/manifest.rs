//! Reproducibility manifest and its checklist audit.
//!
//! The manifest has one JSON section per reporting item. A section is either
//! populated or `{"not_applicable": "<reason>"}`. The audit works on raw JSON
//! so that hand-edited or foreign manifests can be checked too.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::environment::{Environment, Probe};
use crate::clock::ClockMode;
use crate::optimizers::AlgorithmSpec;
use crate::protocol::{ExperimentPlan, RepetitionOutcome};
use crate::types::{RunRecord, TargetKind, Termination};

pub const MANIFEST_FORMAT: &str = "timefair-manifest-v1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Section<T> {
    Present(T),
    NotApplicable { not_applicable: String },
}

impl<T> Section<T> {
    pub fn not_applicable(reason: impl Into<String>) -> Self {
        Section::NotApplicable {
            not_applicable: reason.into(),
        }
    }
}

/// Aggregate budget accounting of an executed plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionStats {
    pub max_overshoot_seconds: f64,
    pub max_iteration_seconds: f64,
    pub overshoot_within_one_iteration: bool,
    pub total_time_used_seconds: f64,
    /// Host time spent between runs on seeding and record assembly.
    pub bookkeeping_seconds: f64,
    pub parallel: bool,
    /// Set when timed runs shared the machine.
    pub concurrency_tainted: bool,
}

impl ExecutionStats {
    pub fn from_outcomes(outcomes: &[RepetitionOutcome], clock: &ClockMode, parallel: bool) -> Self {
        let max_overshoot = outcomes.iter().map(|o| o.overshoot).fold(0.0, f64::max);
        let max_iter = outcomes
            .iter()
            .map(|o| o.max_iteration_seconds)
            .fold(0.0, f64::max);
        Self {
            max_overshoot_seconds: max_overshoot,
            max_iteration_seconds: max_iter,
            overshoot_within_one_iteration: max_overshoot <= max_iter,
            total_time_used_seconds: outcomes.iter().map(|o| o.time_used).sum(),
            bookkeeping_seconds: outcomes.iter().map(|o| o.bookkeeping_seconds).sum(),
            parallel: parallel && clock.is_virtual(),
            concurrency_tainted: parallel && !clock.is_virtual(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetSection {
    pub wall_time_limit: f64,
    pub eval_cap: Option<u64>,
    pub time_unit: &'static str,
    pub clock: ClockMode,
    pub enforcement: &'static str,
    pub execution: Probe<ExecutionStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletedRuns {
    pub algorithm: String,
    pub instance: String,
    pub repetitions: usize,
    /// Mean recorded runs per repetition, including a run cut off by `T`.
    pub mean_runs: f64,
    /// Mean runs per repetition that ended on their own (target or internal stop).
    pub mean_completed_runs: f64,
    pub min_runs: usize,
    pub max_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSection {
    pub restarts_allowed: bool,
    pub policy: &'static str,
    pub algorithms: Vec<AlgorithmSpec>,
    pub completed_runs: Vec<CompletedRuns>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetsSection {
    pub kind: TargetKind,
    pub values: Vec<f64>,
    pub comparison: &'static str,
    pub success_criterion: &'static str,
    pub early_stop: &'static str,
    pub thresholds: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSection {
    /// Output files relative to the experiment directory.
    pub produced: Vec<String>,
    pub settings: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedInfo {
    pub master: u64,
    pub scheme: &'static str,
    pub derivation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticsSection {
    pub seeds: SeedInfo,
    pub repetitions: u32,
    pub confidence_intervals: Value,
    pub tests: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningSection {
    pub method: String,
    pub total_seconds: f64,
    pub per_solver: BTreeMap<String, f64>,
    pub amortization: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactsSection {
    pub config_file: String,
    pub config_hash: String,
    pub code_version: Value,
    pub logs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub replication: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub format: &'static str,
    pub budget: Section<BudgetSection>,
    pub restart_policy: Section<RestartSection>,
    pub targets: Section<TargetsSection>,
    pub metrics: Section<MetricsSection>,
    pub statistics: Section<StatisticsSection>,
    pub environment: Section<Environment>,
    pub tuning: Section<TuningSection>,
    pub artifacts: Section<ArtifactsSection>,
}

impl Manifest {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn budget_section(plan: &ExperimentPlan, execution: Probe<ExecutionStats>) -> BudgetSection {
    BudgetSection {
        wall_time_limit: plan.budget.wall_time_limit(),
        eval_cap: plan.budget.eval_cap(),
        time_unit: "seconds",
        clock: plan.clock,
        enforcement: "clock read between iterations; in virtual mode a step whose charge would cross T is not started",
        execution,
    }
}

/// Run counts per (algorithm, instance), in plan order.
pub fn completed_runs(plan: &ExperimentPlan, records: &[RunRecord]) -> Vec<CompletedRuns> {
    let mut out = Vec::new();
    for a in &plan.algorithms {
        for inst in &plan.instances {
            let mut per_rep: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
            for r in records
                .iter()
                .filter(|r| &r.algorithm_id == &a.id && &r.instance_id == inst)
            {
                let e = per_rep.entry(r.repetition).or_default();
                e.0 += 1;
                if r.termination != Termination::BudgetExhausted {
                    e.1 += 1;
                }
            }
            let reps = per_rep.len();
            let denom = reps.max(1) as f64;
            out.push(CompletedRuns {
                algorithm: a.id.clone(),
                instance: inst.clone(),
                repetitions: reps,
                mean_runs: per_rep.values().map(|v| v.0).sum::<usize>() as f64 / denom,
                mean_completed_runs: per_rep.values().map(|v| v.1).sum::<usize>() as f64 / denom,
                min_runs: per_rep.values().map(|v| v.0).min().unwrap_or(0),
                max_runs: per_rep.values().map(|v| v.0).max().unwrap_or(0),
            });
        }
    }
    out
}

pub fn restart_section(plan: &ExperimentPlan, records: &[RunRecord]) -> RestartSection {
    RestartSection {
        restarts_allowed: true,
        policy: "every algorithm spends T on back-to-back independent runs with derived seeds; the best final value over runs is reported",
        algorithms: plan
            .algorithms
            .iter()
            .cloned()
            .map(AlgorithmSpec::normalized)
            .collect(),
        completed_runs: completed_runs(plan, records),
    }
}

pub fn targets_section(plan: &ExperimentPlan, thresholds: BTreeMap<String, Vec<f64>>) -> TargetsSection {
    TargetsSection {
        kind: plan.targets.kind(),
        values: plan.targets.values().to_vec(),
        comparison: "best_f <= q",
        success_criterion: "a repetition succeeds on q when any of its runs reaches best_f <= q within cumulative time T",
        early_stop: "a run stops when the hardest target is met",
        thresholds,
    }
}

pub fn statistics_section(
    plan: &ExperimentPlan,
    confidence_intervals: Value,
    tests: Value,
) -> StatisticsSection {
    StatisticsSection {
        seeds: SeedInfo {
            master: plan.master_seed,
            scheme: crate::seeds::SEED_SCHEME,
            derivation: "splitmix64(first 8 bytes LE of sha256(\"timefair-seed-v1\", master, len+algorithm, len+instance, repetition, run)); integers as u64 LE",
        },
        repetitions: plan.repetitions,
        confidence_intervals,
        tests,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Digests of `paths`, relative to `root`.
pub fn digests(root: &Path, paths: &[String]) -> io::Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: file_sha256(&root.join(p))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ItemStatus {
    Pass,
    NotApplicable(String),
    Fail(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditItem {
    pub number: usize,
    pub key: &'static str,
    pub title: &'static str,
    pub status: ItemStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    PassWithNote,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::PassWithNote => "PASS-with-note",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub items: Vec<AuditItem>,
}

impl Audit {
    pub fn verdict(&self) -> Verdict {
        if self
            .items
            .iter()
            .any(|i| matches!(i.status, ItemStatus::Fail(_)))
        {
            Verdict::Fail
        } else if self
            .items
            .iter()
            .any(|i| matches!(i.status, ItemStatus::NotApplicable(_)))
        {
            Verdict::PassWithNote
        } else {
            Verdict::Pass
        }
    }

    pub fn item(&self, number: usize) -> &AuditItem {
        &self.items[number - 1]
    }

    pub fn failed_items(&self) -> Vec<usize> {
        self.items
            .iter()
            .filter(|i| matches!(i.status, ItemStatus::Fail(_)))
            .map(|i| i.number)
            .collect()
    }
}

impl fmt::Display for Audit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            let (label, note) = match &i.status {
                ItemStatus::Pass => ("PASS", String::new()),
                ItemStatus::NotApplicable(r) => ("NA", format!("  ({r})")),
                ItemStatus::Fail(r) => ("FAIL", format!("  ({r})")),
            };
            writeln!(f, "{}. {:<28} {label}{note}", i.number, i.title)?;
        }
        write!(f, "verdict: {}", self.verdict())
    }
}

pub const CHECKLIST: [(&str, &str); 8] = [
    ("budget", "Budget specification"),
    ("restart_policy", "Restart policies"),
    ("targets", "Target definitions"),
    ("metrics", "Performance metrics"),
    ("statistics", "Statistical rigor"),
    ("environment", "Computational environment"),
    ("tuning", "Tuning overhead"),
    ("artifacts", "Reproducibility artifacts"),
];

type Check = Result<(), String>;

fn need<'a>(v: &'a Value, key: &str) -> Result<&'a Value, String> {
    match v.get(key) {
        None | Some(Value::Null) => Err(format!("missing `{key}`")),
        Some(x) => Ok(x),
    }
}

fn need_str<'a>(v: &'a Value, key: &str) -> Result<&'a str, String> {
    need(v, key)?
        .as_str()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| format!("`{key}` must be a non-empty string"))
}

fn need_array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>, String> {
    need(v, key)?
        .as_array()
        .filter(|a| !a.is_empty())
        .ok_or_else(|| format!("`{key}` must be a non-empty array"))
}

fn need_number(v: &Value, key: &str) -> Result<f64, String> {
    need(v, key)?
        .as_f64()
        .ok_or_else(|| format!("`{key}` must be a number"))
}

fn check_budget(s: &Value) -> Check {
    let t = need_number(s, "wall_time_limit")?;
    if !(t > 0.0) {
        return Err("wall_time_limit must be > 0".into());
    }
    need(s, "clock")?;
    let exec = need(s, "execution")?;
    if exec.get("not_available").is_none() {
        need_number(exec, "max_overshoot_seconds")?;
        need_number(exec, "max_iteration_seconds")?;
    }
    Ok(())
}

fn check_restarts(s: &Value) -> Check {
    if need(s, "restarts_allowed")?.as_bool() != Some(true) {
        return Err("restarts must be allowed for every algorithm".into());
    }
    need_array(s, "algorithms")?;
    for row in need_array(s, "completed_runs")? {
        need_number(row, "mean_runs")?;
        need_number(row, "mean_completed_runs")?;
    }
    Ok(())
}

fn check_targets(s: &Value) -> Check {
    need_str(s, "kind")?;
    if need_array(s, "values")?.iter().any(|v| !v.is_number()) {
        return Err("`values` must be numbers".into());
    }
    need_str(s, "comparison")?;
    need_str(s, "success_criterion")?;
    Ok(())
}

fn check_metrics(s: &Value) -> Check {
    let produced: Vec<&str> = need_array(s, "produced")?
        .iter()
        .filter_map(Value::as_str)
        .collect();
    for kind in ["ert_table", "ecdf", "median", "profile"] {
        if !produced.iter().any(|p| p.contains(kind)) {
            return Err(format!("no {kind} output listed"));
        }
    }
    Ok(())
}

fn check_statistics(s: &Value) -> Check {
    let seeds = need(s, "seeds")?;
    need(seeds, "master")?
        .as_u64()
        .ok_or("`seeds.master` must be an unsigned integer")?;
    need_str(seeds, "scheme")?;
    let reps = need(s, "repetitions")?.as_u64().unwrap_or(0);
    if reps == 0 {
        return Err("`repetitions` must be >= 1".into());
    }
    if s.get("confidence_intervals").is_none() && s.get("tests").is_none() {
        return Err("neither confidence intervals nor tests declared".into());
    }
    Ok(())
}

fn check_environment(s: &Value) -> Check {
    for key in [
        "cpu_model",
        "logical_cores",
        "physical_cores",
        "os",
        "memory_bytes",
        "timer",
        "build",
    ] {
        let v = need(s, key)?;
        if let Some(reason) = v.get("not_available") {
            if reason.as_str().map_or(true, str::is_empty) {
                return Err(format!("`{key}` unavailable without a reason"));
            }
        }
    }
    Ok(())
}

fn check_tuning(s: &Value) -> Check {
    need_str(s, "method")?;
    if !(need_number(s, "total_seconds")? >= 0.0) {
        return Err("`total_seconds` must be >= 0".into());
    }
    need_str(s, "amortization")?;
    Ok(())
}

fn check_digest(root: &Path, entry: &Value) -> Check {
    let path = need_str(entry, "path")?;
    let want = need_str(entry, "sha256")?;
    match file_sha256(&root.join(path)) {
        Ok(got) if got == want => Ok(()),
        Ok(_) => Err(format!("digest mismatch for {path}")),
        Err(e) => Err(format!("cannot read {path}: {e}")),
    }
}

fn check_artifacts(s: &Value, root: Option<&Path>) -> Check {
    let config_file = need_str(s, "config_file")?;
    let hash = need_str(s, "config_hash")?;
    need(s, "code_version")?;
    let logs = need_array(s, "logs")?;
    let outputs = s.get("outputs").and_then(Value::as_array);
    if let Some(root) = root {
        let got = file_sha256(&root.join(config_file))
            .map_err(|e| format!("cannot read {config_file}: {e}"))?;
        if hash.strip_prefix("sha256:") != Some(got.as_str()) {
            return Err(format!("config hash does not match {config_file}"));
        }
        for entry in logs.iter().chain(outputs.into_iter().flatten()) {
            check_digest(root, entry)?;
        }
    }
    Ok(())
}

/// Audits a manifest; with `root`, file digests and the config hash are verified too.
pub fn audit(manifest: &Value, root: Option<&Path>) -> Audit {
    let items = CHECKLIST
        .iter()
        .enumerate()
        .map(|(i, &(key, title))| {
            let status = match manifest.get(key) {
                None | Some(Value::Null) => ItemStatus::Fail("section missing".into()),
                Some(section) => match section.get("not_applicable") {
                    Some(reason) => match reason.as_str() {
                        Some(r) if !r.trim().is_empty() => ItemStatus::NotApplicable(r.to_string()),
                        _ => ItemStatus::Fail("not applicable without a reason".into()),
                    },
                    None => {
                        let check = match key {
                            "budget" => check_budget(section),
                            "restart_policy" => check_restarts(section),
                            "targets" => check_targets(section),
                            "metrics" => check_metrics(section),
                            "statistics" => check_statistics(section),
                            "environment" => check_environment(section),
                            "tuning" => check_tuning(section),
                            _ => check_artifacts(section, root),
                        };
                        match check {
                            Ok(()) => ItemStatus::Pass,
                            Err(e) => ItemStatus::Fail(e),
                        }
                    }
                },
            };
            AuditItem {
                number: i + 1,
                key,
                title,
                status,
            }
        })
        .collect();
    Audit { items }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::AlgorithmKind;
    use crate::report::environment::probe;
    use crate::types::{Budget, TargetSpec};
    use serde_json::json;

    fn plan() -> ExperimentPlan {
        ExperimentPlan {
            algorithms: vec![AlgorithmSpec::new("pso", AlgorithmKind::Pso)],
            instances: vec!["sphere-d2".into()],
            budget: Budget::new(1.0, None).unwrap(),
            targets: TargetSpec::default_relative(),
            repetitions: 2,
            master_seed: 9,
            clock: ClockMode::Virtual {
                cost_per_eval: 1e-3,
            },
        }
    }

    fn record(rep: u32, run: u32, termination: Termination) -> RunRecord {
        RunRecord {
            algorithm_id: "pso".into(),
            instance_id: "sphere-d2".into(),
            repetition: rep,
            run_index: run,
            seed: 0,
            params: Value::Null,
            trajectory: vec![],
            first_hits: vec![],
            time_used: 0.0,
            evals_used: 0,
            clamped_evals: 0,
            termination,
        }
    }

    fn fixture(dir: &Path, tuning: Section<TuningSection>) -> Value {
        std::fs::write(dir.join("effective_config.toml"), "master_seed = 9\n").unwrap();
        std::fs::create_dir_all(dir.join("runs/pso")).unwrap();
        std::fs::write(dir.join("runs/pso/sphere-d2.jsonl"), "{}\n").unwrap();
        let p = plan();
        let records = vec![
            record(0, 0, Termination::InternalStop),
            record(0, 1, Termination::BudgetExhausted),
            record(1, 0, Termination::InternalStop),
        ];
        let m = Manifest {
            format: MANIFEST_FORMAT,
            budget: Section::Present(budget_section(&p, Probe::unavailable("not executed"))),
            restart_policy: Section::Present(restart_section(&p, &records)),
            targets: Section::Present(targets_section(&p, BTreeMap::new())),
            metrics: Section::Present(MetricsSection {
                produced: vec![
                    "ert_table.csv".into(),
                    "curves/ecdf_pso.csv".into(),
                    "curves/median_sphere-d2.csv".into(),
                    "curves/profile_q0.csv".into(),
                ],
                settings: json!({}),
            }),
            statistics: Section::Present(statistics_section(&p, json!({"method": "bootstrap"}), json!(null))),
            environment: Section::Present(probe(&p.clock)),
            tuning,
            artifacts: Section::Present(ArtifactsSection {
                config_file: "effective_config.toml".into(),
                config_hash: format!(
                    "sha256:{}",
                    file_sha256(&dir.join("effective_config.toml")).unwrap()
                ),
                code_version: json!({"package": "0.1.0"}),
                logs: digests(dir, &["runs/pso/sphere-d2.jsonl".into()]).unwrap(),
                outputs: vec![],
                replication: "timefair analyze <dir>",
            }),
        };
        serde_json::from_str(&m.to_json_pretty()).unwrap()
    }

    fn tuning() -> Section<TuningSection> {
        Section::Present(TuningSection {
            method: "grid".into(),
            total_seconds: 4.0,
            per_solver: BTreeMap::from([("pso".into(), 4.0)]),
            amortization: "even_per_instance".into(),
        })
    }

    #[test]
    fn complete_manifest_passes() {
        let dir = tempfile::tempdir().unwrap();
        let v = fixture(dir.path(), tuning());
        let a = audit(&v, Some(dir.path()));
        assert_eq!(a.verdict(), Verdict::Pass, "{a}");
        assert_eq!(v["environment"]["timer"], "virtual");
    }

    #[test]
    fn missing_tuning_is_a_note() {
        let dir = tempfile::tempdir().unwrap();
        let v = fixture(dir.path(), Section::not_applicable("no tuning performed"));
        let a = audit(&v, Some(dir.path()));
        assert_eq!(a.verdict(), Verdict::PassWithNote);
        assert_eq!(
            a.item(7).status,
            ItemStatus::NotApplicable("no tuning performed".into())
        );
    }

    #[test]
    fn deleted_seeds_fail_item_five() {
        let dir = tempfile::tempdir().unwrap();
        let mut v = fixture(dir.path(), tuning());
        v["statistics"].as_object_mut().unwrap().remove("seeds");
        let a = audit(&v, Some(dir.path()));
        assert_eq!(a.verdict(), Verdict::Fail);
        assert_eq!(a.failed_items(), vec![5]);
    }

    #[test]
    fn tampered_digest_fails_item_eight() {
        let dir = tempfile::tempdir().unwrap();
        let v = fixture(dir.path(), tuning());
        std::fs::write(dir.path().join("runs/pso/sphere-d2.jsonl"), "{}\n{}\n").unwrap();
        let a = audit(&v, Some(dir.path()));
        assert_eq!(a.failed_items(), vec![8]);
        assert!(matches!(&a.item(8).status, ItemStatus::Fail(m) if m.contains("digest mismatch")));
    }

    #[test]
    fn average_completed_runs() {
        let p = plan();
        let rows = completed_runs(
            &p,
            &[
                record(0, 0, Termination::InternalStop),
                record(0, 1, Termination::BudgetExhausted),
                record(1, 0, Termination::InternalStop),
            ],
        );
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].repetitions, 2);
        assert_eq!(rows[0].mean_runs, 1.5);
        assert_eq!(rows[0].mean_completed_runs, 1.0);
        assert_eq!((rows[0].min_runs, rows[0].max_runs), (1, 2));
    }

    #[test]
    fn empty_reason_is_not_enough() {
        let v = json!({"budget": {"not_applicable": ""}});
        let a = audit(&v, None);
        assert!(matches!(a.item(1).status, ItemStatus::Fail(_)));
        assert!(matches!(a.item(2).status, ItemStatus::Fail(_)));
    }
}

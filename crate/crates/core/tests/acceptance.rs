//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use timefair::analysis::RunTable;
use timefair::cli::run_cli;
use timefair::config::ExperimentConfig;
use timefair::metrics::{
    anytime_ecdf, ert, log_time_grid, performance_profile, AllFailedPolicy, EcdfGroup,
};
use timefair::pipeline;
use timefair::problems::{rastrigin, FunctionKind};
use timefair::protocol::{best_of_restarts, restart_count};
use timefair::report::{parse_run_log, write_run_log, ItemStatus, ParseMode};
use timefair::simulate;
use timefair::types::validate;
use timefair::{Costs, FirstHit, Problem, RunRecord, Termination, TrajectoryPoint};

type Check = Result<String, String>;

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml")
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Straight from the definition: sum the successful times, add T per failure.
fn brute_ert(times: &[Option<f64>], budget: f64) -> (f64, usize) {
    let hits: Vec<f64> = times.iter().flatten().map(|&t| t.min(budget)).collect();
    if hits.is_empty() {
        return (f64::INFINITY, 0);
    }
    let failures = times.len() - hits.len();
    let total: f64 = hits.iter().rev().sum::<f64>() + failures as f64 * budget;
    (total / hits.len() as f64, hits.len())
}

fn ac1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut zero_cases = 0;
    for case in 0..1000 {
        let r = rng.gen_range(1..=50usize);
        let budget = rng.gen_range(1.0..100.0);
        let p_hit = match case % 4 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f64>(),
        };
        let times: Vec<Option<f64>> = (0..r)
            .map(|_| rng.gen_bool(p_hit).then(|| rng.gen_range(0.0..=budget)))
            .collect();
        let got = ert(1.0, &times, budget);
        let (want, s) = brute_ert(&times, budget);
        ensure(got.successes == s && got.runs == r, || {
            format!("case {case}: counts {}/{} vs {s}/{r}", got.successes, got.runs)
        })?;
        ensure(got.success_rate == s as f64 / r as f64, || {
            format!("case {case}: success rate {}", got.success_rate)
        })?;
        if s == 0 {
            zero_cases += 1;
            ensure(got.ert == f64::INFINITY, || format!("case {case}: s = 0 gave {}", got.ert))?;
        } else {
            let e = rel_err(got.ert, want);
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("case {case}: {} vs {want} (rel {e:e})", got.ert))?;
        }
    }
    Ok(format!("1000 fixtures ({zero_cases} with s = 0), max rel err {worst:e}"))
}

fn ac2() -> Check {
    ensure(matches!(restart_count(50.0, 10.0), Ok(5)) && matches!(restart_count(50.0, 50.0), Ok(1)), || {
        "restart_count(50, 10 | 50) is not (5, 1)".into()
    })?;
    let mut lines = Vec::new();
    for seed in [simulate::SCENARIO_SEED, 7, 99] {
        let mut cfg = simulate::scenario_config();
        cfg.master_seed = seed;
        let exec = pipeline::execute(&cfg.effective()).map_err(|e| e.to_string())?;
        for o in &exec.outcomes {
            let (runs, cost) = if o.algorithm_id == simulate::BASELINE_ID {
                (5, 10.0)
            } else {
                (1, 50.0)
            };
            ensure(o.records.len() == runs, || {
                format!("seed {seed}: {} rep {} has {} runs", o.algorithm_id, o.repetition, o.records.len())
            })?;
            for r in &o.records {
                ensure(r.time_used == cost && r.termination == Termination::InternalStop, || {
                    format!(
                        "seed {seed}: {} rep {} run {} used {} s ({})",
                        r.algorithm_id, r.repetition, r.run_index, r.time_used, r.termination
                    )
                })?;
            }
            if o.algorithm_id == simulate::BASELINE_ID {
                let best = best_of_restarts(&o.records).map_err(|e| e.to_string())?.value;
                let first = o.records[0].final_best().unwrap_or(f64::INFINITY);
                ensure(best <= first, || {
                    format!("seed {seed} rep {}: best-of-restarts {best} > first run {first}", o.repetition)
                })?;
            }
        }
        let rows = simulate::scenario_rows(&exec);
        let base = &rows[0];
        ensure(base.median_best_of_restarts <= base.median_first_run, || {
            format!(
                "seed {seed}: median best-of-restarts {} > median single run {}",
                base.median_best_of_restarts, base.median_first_run
            )
        })?;
        lines.push(format!(
            "seed {seed}: {:.3} <= {:.3}",
            base.median_best_of_restarts, base.median_first_run
        ));
    }
    Ok(format!("5 vs 1 runs of 10 s / 50 s; medians {}", lines.join(", ")))
}

fn ac3() -> Check {
    let mut times = vec![Some(18.0); 19];
    times.push(None);
    let r = ert::<f64>(5.0, &times, 50.0);
    let want = 392.0 / 19.0;
    ensure((r.ert - want).abs() <= 1e-9, || format!("ERT {} vs {want}", r.ert))?;
    ensure(r.successes == 19 && r.runs == 20 && r.success_rate == 0.95, || {
        format!("success {}/{} rate {}", r.successes, r.runs, r.success_rate)
    })?;
    Ok(format!("ERT = {} (392/19), success rate 0.95", r.ert))
}

fn matrix(rows: Vec<Vec<f64>>) -> Costs {
    let solvers = (0..rows[0].len()).map(|s| format!("s{s}")).collect();
    let instances = (0..rows.len()).map(|p| format!("p{p}")).collect();
    Costs::new(solvers, instances, rows).expect("valid cost matrix")
}

fn ac4() -> Check {
    let fixture = Costs::new(
        vec!["A".into(), "B".into()],
        vec!["p1".into(), "p2".into()],
        vec![vec![2.0, 4.0], vec![6.0, 3.0]],
    )
    .map_err(|e| e.to_string())?;
    let set = performance_profile(&fixture, AllFailedPolicy::Exclude);
    for c in &set.curves {
        ensure(c.rho_at(1.0) == 0.5 && c.rho_at(2.0) == 1.0, || {
            format!("{}: rho(1) = {}, rho(2) = {}", c.solver_id, c.rho_at(1.0), c.rho_at(2.0))
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..300 {
        let (np, ns) = (rng.gen_range(1..=8), rng.gen_range(1..=5));
        let rows: Vec<Vec<f64>> = (0..np)
            .map(|_| {
                (0..ns)
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            f64::INFINITY
                        } else {
                            rng.gen_range(1..=50u32) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let costs = matrix(rows.clone());
        let base = performance_profile(&costs, AllFailedPolicy::Exclude);
        for c in &base.curves {
            ensure(c.ratios.windows(2).all(|w| w[0] < w[1]), || format!("case {case}: unsorted ratios"))?;
            ensure(c.ratios.iter().all(|&r| r >= 1.0), || format!("case {case}: ratio below 1"))?;
            ensure(c.rho.windows(2).all(|w| w[0] <= w[1]), || format!("case {case}: rho decreases"))?;
            ensure(c.rho.iter().all(|&r| (0.0..=1.0).contains(&r)), || format!("case {case}: rho outside [0, 1]"))?;
        }
        for scale in [0.1, 3.0, 1000.0] {
            let scaled = matrix(rows.iter().map(|r| r.iter().map(|c| c * scale).collect()).collect());
            let other = performance_profile(&scaled, AllFailedPolicy::Exclude);
            for (a, b) in base.curves.iter().zip(&other.curves) {
                // Probe between and just past breakpoints, away from rounding at the steps.
                let mut probes: Vec<f64> = a.ratios.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                probes.extend(a.ratios.iter().map(|r| r * (1.0 + 1e-9)));
                probes.push(0.5);
                for tau in probes {
                    ensure(a.rho_at(tau) == b.rho_at(tau), || {
                        format!("case {case}, scale {scale}: rho({tau}) {} vs {}", a.rho_at(tau), b.rho_at(tau))
                    })?;
                }
            }
        }
    }
    Ok("fixture rho(1) = 0.5, rho(2) = 1 for A and B; 300 random matrices monotone, in [0, 1], scale invariant".into())
}

fn random_plan_runs(seed: u64) -> Result<(timefair::ExperimentPlan, Vec<timefair::RepetitionOutcome>), String> {
    let text = format!(
        r#"
master_seed = {seed}
repetitions = 25
instances = ["sphere-d5", "rastrigin-d5", "ackley-d2", "rosenbrock-d2"]
[budget]
wall_time_limit = 2.0
[clock]
mode = "virtual"
cost_per_eval = 0.0003
[[algorithms]]
id = "pso"
kind = "pso"
max_iterations = 60
[[algorithms]]
id = "rs"
kind = "random-search"
max_iterations = 900
"#
    );
    let cfg = ExperimentConfig::from_toml_str(&text).map_err(|e| e.to_string())?;
    let exec = pipeline::execute(&cfg.effective()).map_err(|e| e.to_string())?;
    Ok((exec.plan, exec.outcomes))
}

// Repetition-level first hit recomputed from raw trajectory points.
fn brute_hit(runs: &[RunRecord], q: f64, t: f64, budget: f64) -> bool {
    let mut offset = 0.0;
    for r in runs {
        for p in &r.trajectory {
            if p.best_f <= q {
                let at = offset + p.elapsed;
                return at <= budget && at <= t;
            }
        }
        offset += r.time_used;
    }
    false
}

fn ac5() -> Check {
    let (plan, outcomes) = random_plan_runs(5)?;
    ensure(outcomes.len() == 200, || format!("{} repetitions, expected 200", outcomes.len()))?;
    let thresholds = timefair::analysis::thresholds(&plan).map_err(|e| e.to_string())?;
    let budget = plan.budget.wall_time_limit();
    let grid = log_time_grid(budget, 64, 1e-3).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for alg in &plan.algorithms {
        let mut groups = Vec::new();
        for inst in &plan.instances {
            let reps: Vec<&[RunRecord]> = outcomes
                .iter()
                .filter(|o| o.algorithm_id == alg.id && &o.instance_id == inst)
                .map(|o| o.records.as_slice())
                .collect();
            groups.push(EcdfGroup {
                repetitions: reps,
                targets: thresholds[inst].clone(),
                budget,
            });
        }
        let curve = anytime_ecdf(&groups, &grid).map_err(|e| e.to_string())?;
        let pairs: usize = groups.iter().map(|g| g.repetitions.len() * g.targets.len()).sum();
        ensure(curve.denominator == pairs, || format!("{}: denominator {}", alg.id, curve.denominator))?;
        for (k, &t) in grid.iter().enumerate() {
            let count = groups
                .iter()
                .flat_map(|g| {
                    g.repetitions
                        .iter()
                        .flat_map(move |reps| g.targets.iter().map(move |&q| brute_hit(reps, q, t, budget)))
                })
                .filter(|&h| h)
                .count();
            ensure(curve.numerator[k] == count && curve.fraction[k] == count as f64 / pairs as f64, || {
                format!("{} at t = {t}: {} vs recount {count}", alg.id, curve.numerator[k])
            })?;
            checked += 1;
        }
        ensure(curve.fraction.windows(2).all(|w| w[0] <= w[1]), || format!("{}: not monotone", alg.id))?;
        ensure(curve.fraction.iter().all(|f| (0.0..=1.0).contains(f)), || format!("{}: outside [0, 1]", alg.id))?;
    }
    Ok(format!("200 repetitions, {checked} grid points match the recount exactly"))
}

fn ac6() -> Check {
    let mut plans = 0;
    let mut reps = 0;
    for seed in 0..4 {
        let (plan, outcomes) = random_plan_runs(100 + seed)?;
        let limit = plan.budget.wall_time_limit();
        for o in &outcomes {
            let total: f64 = o.records.iter().map(|r| r.time_used).sum();
            ensure(o.time_used <= limit && o.overshoot == 0.0, || {
                format!("{} {} rep {}: used {} > {limit}", o.algorithm_id, o.instance_id, o.repetition, o.time_used)
            })?;
            ensure(total <= limit + 1e-12, || format!("run times sum to {total}"))?;
            reps += 1;
        }
        plans += 1;
    }
    let exec = pipeline::execute(&simulate::scenario_config().effective()).map_err(|e| e.to_string())?;
    ensure(exec.outcomes.iter().all(|o| o.time_used <= simulate::WALL_TIME_LIMIT), || {
        "scenario repetition exceeded T".into()
    })?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::from_toml_str(
        r#"
master_seed = 3
repetitions = 1
instances = ["rastrigin-d10"]
[budget]
wall_time_limit = 2.0
[clock]
mode = "real"
[[algorithms]]
id = "pso"
kind = "pso"
max_iterations = 300
"#,
    )
    .map_err(|e| e.to_string())?;
    let mut sink = Vec::new();
    let (exec, _) = pipeline::run_experiment(&cfg, dir.path(), &mut sink).map_err(|e| e.to_string())?;
    let o = &exec.outcomes[0];
    ensure(o.time_used >= 2.0, || format!("real run stopped early at {} s", o.time_used))?;
    ensure(o.overshoot <= o.max_iteration_seconds, || {
        format!("overshoot {} > max iteration {}", o.overshoot, o.max_iteration_seconds)
    })?;
    let manifest: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("manifest.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let recorded = &manifest["budget"]["execution"];
    ensure(
        recorded["max_overshoot_seconds"].as_f64() == Some(o.overshoot)
            && recorded["overshoot_within_one_iteration"] == json!(true),
        || format!("manifest execution block: {recorded}"),
    )?;
    Ok(format!(
        "{reps} virtual repetitions over {plans} plans within T; real 2 s run overshoot {:.2e} s <= iteration {:.2e} s, recorded in manifest",
        o.overshoot, o.max_iteration_seconds
    ))
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let mut full = vec!["timefair"];
    full.extend_from_slice(args);
    let code = run_cli(full, &mut o, &mut e);
    (code, String::from_utf8_lossy(&o).into_owned(), String::from_utf8_lossy(&e).into_owned())
}

fn ac7() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = demo_config();
    let mut trees = Vec::new();
    for (name, extra) in [("a", None), ("b", None), ("c", Some("--parallel"))] {
        let dir = tmp.path().join(name);
        let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()];
        args.extend(extra);
        let (code, _, err) = cli(&args);
        ensure(code == 0, || format!("run {name} exited {code}: {err}"))?;
        let (code, _, err) = cli(&["analyze", dir.to_str().unwrap()]);
        ensure(code == 0, || format!("analyze {name} exited {code}: {err}"))?;
        trees.push(read_tree(&dir));
    }
    let a = &trees[0];
    let logs = a.keys().filter(|p| p.starts_with("runs")).count();
    ensure(logs > 0, || "no logs written".into())?;
    // The manifest carries host timings; the parallel run's config records the flag.
    for (other, skip) in [(&trees[1], vec!["manifest.json"]), (&trees[2], vec!["manifest.json", "effective_config.toml"])] {
        for (path, bytes) in a {
            if skip.iter().any(|s| path.as_os_str() == *s) {
                continue;
            }
            ensure(other.get(path) == Some(bytes), || format!("{} differs", path.display()))?;
        }
        ensure(a.len() == other.len(), || "file sets differ".into())?;
    }
    Ok(format!(
        "{logs} JSONL logs and {} derived files byte-identical across two sequential runs and a parallel one",
        a.len() - logs - 2
    ))
}

fn random_record(rng: &mut ChaCha8Rng, alg: &str, inst: &str, rep: u32, run: u32, targets: &[f64]) -> RunRecord {
    let mut trajectory = Vec::new();
    let (mut t, mut evals) = (0.0f64, 0u64);
    let mut best = rng.gen_range(1.0..1e6) * 10f64.powi(rng.gen_range(-3..4));
    for _ in 0..rng.gen_range(0..12) {
        t += rng.gen::<f64>() * 0.3;
        evals += rng.gen_range(1..200);
        best *= rng.gen_range(0.01..0.999);
        trajectory.push(TrajectoryPoint {
            elapsed: t,
            evals,
            best_f: best,
        });
    }
    let first_hits: Vec<FirstHit> = RunRecord::first_hits_for(&trajectory, targets);
    let reached = trajectory.last().is_some_and(|p| p.best_f <= targets[targets.len() - 1]);
    RunRecord {
        algorithm_id: alg.into(),
        instance_id: inst.into(),
        repetition: rep,
        run_index: run,
        seed: rng.gen(),
        params: json!({"w": rng.gen::<f64>(), "swarm_size": rng.gen_range(2..100)}),
        trajectory,
        first_hits,
        time_used: t + rng.gen::<f64>(),
        evals_used: if evals == 0 { 0 } else { evals + rng.gen_range(0..50) },
        clamped_evals: rng.gen_range(0..10),
        termination: if reached {
            Termination::TargetReached
        } else if rng.gen_bool(0.5) {
            Termination::BudgetExhausted
        } else {
            Termination::InternalStop
        },
    }
}

fn ert_table(records: Vec<RunRecord>, pairs: &[(String, String)], targets: &[f64], budget: f64) -> Vec<timefair::Ert> {
    let table = RunTable::new(records);
    let mut out = Vec::new();
    for (alg, inst) in pairs {
        let reps = table.repetitions(alg, inst);
        for &q in targets {
            let times: Vec<Option<f64>> = reps
                .iter()
                .map(|runs| timefair::metrics::repetition_time_to_target(runs, q, budget))
                .collect();
            out.push(ert(q, &times, budget));
        }
    }
    out
}

fn ac8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let targets = [1e4, 1e2, 1.0, 1e-2];
    let mut pairs = Vec::new();
    let mut all = Vec::new();
    let mut reparsed = Vec::new();
    for alg in ["a", "b"] {
        for inst in ["p1", "p2", "p3", "p4", "p5"] {
            let mut records = Vec::new();
            for rep in 0..50 {
                for run in 0..20 {
                    let r = random_record(&mut rng, alg, inst, rep, run, &targets);
                    validate(&r).map_err(|v| format!("generator produced invalid record: {v:?}"))?;
                    records.push(r);
                }
            }
            let mut buf = Vec::new();
            write_run_log(&mut buf, &records).map_err(|e| e.to_string())?;
            let parsed = parse_run_log(buf.as_slice(), ParseMode::Strict).map_err(|e| e.to_string())?;
            ensure(parsed.records == records, || format!("{alg}/{inst}: records differ after round trip"))?;
            pairs.push((alg.to_string(), inst.to_string()));
            all.extend(records);
            reparsed.extend(parsed.records);
        }
    }
    let n = all.len();
    ensure(n == 10_000, || format!("{n} records"))?;
    let before = ert_table(all, &pairs, &targets, 30.0);
    let after = ert_table(reparsed, &pairs, &targets, 30.0);
    ensure(before == after, || "ERT tables differ".into())?;
    Ok(format!("{n} records identical after write/parse; {} ERT rows identical", before.len()))
}

fn ac9() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path().join("demo");
    let d = dir.to_str().unwrap();
    let (code, _, err) = cli(&["run", "--config", demo_config().to_str().unwrap(), "--out", d]);
    ensure(code == 0, || format!("run exited {code}: {err}"))?;
    let audit = timefair::cli::audit_dir(&dir).map_err(|e| e.to_string())?;
    ensure(audit.items.iter().all(|i| i.status == ItemStatus::Pass), || format!("audit:\n{audit}"))?;
    let (code, out, _) = cli(&["report", d]);
    ensure(code == 0 && out.contains("verdict: PASS"), || format!("report exited {code}:\n{out}"))?;

    let path = dir.join("manifest.json");
    let mut manifest: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    manifest["statistics"]
        .as_object_mut()
        .ok_or("statistics section missing")?
        .remove("seeds");
    fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    let (code, out, _) = cli(&["report", d]);
    let audit = timefair::cli::audit_dir(&dir).map_err(|e| e.to_string())?;
    ensure(matches!(audit.item(5).status, ItemStatus::Fail(_)), || format!("item 5 not failed:\n{audit}"))?;
    ensure(audit.failed_items() == vec![5], || format!("failed items {:?}", audit.failed_items()))?;
    ensure(code != 0, || format!("report exited 0 after deleting seeds:\n{out}"))?;
    Ok(format!("all 8 items PASS; without seeds item 5 FAIL and report exits {code}"))
}

fn ac10() -> Check {
    let mut n = 0;
    for kind in FunctionKind::ALL {
        for d in [2, 5, 10] {
            let p = Problem::builtin(kind, d).map_err(|e| e.to_string())?;
            let f = p.evaluate(p.x_opt().ok_or("no x_opt")?).map_err(|e| e.to_string())?;
            let f_opt = p.f_opt().ok_or("no f_opt")?;
            ensure((f - f_opt).abs() <= 1e-12, || format!("{}: f(x*) = {f}, f_opt = {f_opt}", p.id()))?;
            n += 1;
        }
    }
    let r = rastrigin(&[1.0f64, 0.0]);
    ensure(r == 1.0, || format!("rastrigin(1, 0) = {r}"))?;
    Ok(format!("{n} (function, dimension) optima within 1e-12; rastrigin(1, 0) = 1"))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Check, u64); 10] = [
        ("AC1", "ERT oracle equivalence", ac1, 1),
        ("AC2", "restart scenario structure", ac2, 5),
        ("AC3", "ERT fixture 392/19", ac3, 1),
        ("AC4", "performance profiles", ac4, 1),
        ("AC5", "ECDF recount", ac5, 2),
        ("AC6", "budget enforcement", ac6, 10),
        ("AC7", "determinism and replay", ac7, 5),
        ("AC8", "log round trip", ac8, 5),
        ("AC9", "checklist audit", ac9, 10),
        ("AC10", "problem optima", ac10, 1),
    ];
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > Duration::from_secs(limit) => {
                Err(format!("took {:.2} s, limit {limit} s", took.as_secs_f64()))
            }
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {id} {name}: {detail} [{:.3} s]", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why} [{:.3} s]", took.as_secs_f64());
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

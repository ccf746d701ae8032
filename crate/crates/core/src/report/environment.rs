//! Best-effort description of the machine and build.
//!
//! Anything that cannot be determined is recorded as unavailable with a
//! reason rather than guessed.

use std::collections::BTreeSet;
use std::fs;

use serde::{Deserialize, Serialize};

use crate::clock::{real_timer_resolution, ClockMode};

/// A probed value, or the reason it is unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probe<T> {
    Known(T),
    Unavailable { not_available: String },
}

impl<T> Probe<T> {
    pub fn unavailable(reason: impl Into<String>) -> Self {
        Probe::Unavailable {
            not_available: reason.into(),
        }
    }

    fn from_option(v: Option<T>, reason: &str) -> Self {
        match v {
            Some(v) => Probe::Known(v),
            None => Probe::unavailable(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub package_version: String,
    pub rustc: Probe<String>,
    pub profile: Probe<String>,
    pub opt_level: Probe<String>,
    pub target: Probe<String>,
    pub git_revision: Probe<String>,
    /// `name=version` pairs of result-relevant dependencies.
    pub libraries: Probe<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub cpu_model: Probe<String>,
    pub physical_cores: Probe<usize>,
    pub logical_cores: Probe<usize>,
    pub gpu: Probe<String>,
    pub os: Probe<String>,
    pub kernel: Probe<String>,
    pub memory_bytes: Probe<u64>,
    /// `"virtual"` for simulated time, otherwise the measured tick in seconds.
    pub timer: String,
    pub timer_resolution_seconds: Probe<f64>,
    pub cpu_affinity: Probe<String>,
    pub build: BuildInfo,
}

fn embedded(value: &'static str) -> Probe<String> {
    if value.is_empty() {
        Probe::unavailable("not embedded by the build")
    } else {
        Probe::Known(value.to_string())
    }
}

pub fn build_info() -> BuildInfo {
    let libs = env!("TIMEFAIR_LOCKED_DEPS");
    BuildInfo {
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        rustc: embedded(env!("TIMEFAIR_RUSTC_VERSION")),
        profile: embedded(env!("TIMEFAIR_PROFILE")),
        opt_level: embedded(env!("TIMEFAIR_OPT_LEVEL")),
        target: embedded(env!("TIMEFAIR_TARGET")),
        git_revision: embedded(env!("TIMEFAIR_GIT_REV")),
        libraries: if libs.is_empty() {
            Probe::unavailable("lock file not found at build time")
        } else {
            Probe::Known(libs.split(',').map(String::from).collect())
        },
    }
}

fn cpuinfo_model(text: &str) -> Option<String> {
    text.lines()
        .find(|l| l.starts_with("model name"))
        .and_then(|l| l.split_once(':'))
        .map(|(_, v)| v.trim().to_string())
}

/// Distinct (physical id, core id) pairs.
fn cpuinfo_physical_cores(text: &str) -> Option<usize> {
    let mut cores = BTreeSet::new();
    let mut package = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        match key.trim() {
            "physical id" => package = Some(value.trim().to_string()),
            "core id" => {
                cores.insert((package.clone(), value.trim().to_string()));
            }
            _ => {}
        }
    }
    (!cores.is_empty()).then_some(cores.len())
}

fn meminfo_total(text: &str) -> Option<u64> {
    let line = text.lines().find(|l| l.starts_with("MemTotal:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn os_release_name(text: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix("PRETTY_NAME="))
        .map(|v| v.trim_matches('"').to_string())
}

pub fn probe(clock: &ClockMode) -> Environment {
    let cpuinfo = fs::read_to_string("/proc/cpuinfo").ok();
    let cpu_model = match &cpuinfo {
        Some(t) => Probe::from_option(cpuinfo_model(t), "no model name in /proc/cpuinfo"),
        None => Probe::unavailable("/proc/cpuinfo unreadable"),
    };
    let physical_cores = match &cpuinfo {
        Some(t) => Probe::from_option(
            cpuinfo_physical_cores(t),
            "no core ids in /proc/cpuinfo",
        ),
        None => Probe::unavailable("/proc/cpuinfo unreadable"),
    };
    let logical_cores = match std::thread::available_parallelism() {
        Ok(n) => Probe::Known(n.get()),
        Err(e) => Probe::unavailable(e.to_string()),
    };
    let os = match fs::read_to_string("/etc/os-release") {
        Ok(t) => Probe::from_option(os_release_name(&t), "no PRETTY_NAME in /etc/os-release"),
        Err(_) => Probe::Known(std::env::consts::OS.to_string()),
    };
    let kernel = Probe::from_option(
        fs::read_to_string("/proc/sys/kernel/osrelease")
            .ok()
            .map(|s| s.trim().to_string()),
        "/proc/sys/kernel/osrelease unreadable",
    );
    let memory_bytes = Probe::from_option(
        fs::read_to_string("/proc/meminfo")
            .ok()
            .and_then(|t| meminfo_total(&t)),
        "MemTotal not found in /proc/meminfo",
    );
    let (timer, timer_resolution_seconds) = if clock.is_virtual() {
        (
            "virtual".to_string(),
            Probe::unavailable("virtual clock; time is charged per evaluation"),
        )
    } else {
        (
            "monotonic".to_string(),
            Probe::Known(real_timer_resolution()),
        )
    };
    Environment {
        cpu_model,
        physical_cores,
        logical_cores,
        gpu: Probe::unavailable("not probed; the harness runs on the CPU only"),
        os,
        kernel,
        memory_bytes,
        timer,
        timer_resolution_seconds,
        cpu_affinity: Probe::unavailable("not set by the harness"),
        build: build_info(),
    }
}

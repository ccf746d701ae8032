use std::path::PathBuf;
use std::process::Command;

fn run(cmd: &str, args: &[&str]) -> Option<String> {
    let out = Command::new(cmd).args(args).output().ok()?;
    if !out.status.success() {
        return None;
    }
    let s = String::from_utf8(out.stdout).ok()?.trim().to_string();
    (!s.is_empty()).then_some(s)
}

/// Versions of the crates whose behaviour affects results, read from the lock file.
fn locked_versions() -> Option<String> {
    let root = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").ok()?);
    let lock = std::fs::read_to_string(root.join("../../Cargo.lock")).ok()?;
    let wanted = ["rand", "rand_chacha", "serde_json", "statrs", "ryu"];
    let mut found = Vec::new();
    let mut name = None;
    for line in lock.lines() {
        if let Some(n) = line.strip_prefix("name = ") {
            name = Some(n.trim_matches('"').to_string());
        } else if let Some(v) = line.strip_prefix("version = ") {
            if let Some(n) = name.take() {
                if wanted.contains(&n.as_str()) {
                    found.push(format!("{n}={}", v.trim_matches('"')));
                }
            }
        }
    }
    (!found.is_empty()).then(|| found.join(","))
}

fn main() {
    let rustc = std::env::var("RUSTC").unwrap_or_else(|_| "rustc".into());
    let env = [
        ("TIMEFAIR_RUSTC_VERSION", run(&rustc, &["--version"])),
        ("TIMEFAIR_GIT_REV", run("git", &["rev-parse", "--short=12", "HEAD"])),
        ("TIMEFAIR_OPT_LEVEL", std::env::var("OPT_LEVEL").ok()),
        ("TIMEFAIR_PROFILE", std::env::var("PROFILE").ok()),
        ("TIMEFAIR_TARGET", std::env::var("TARGET").ok()),
        ("TIMEFAIR_LOCKED_DEPS", locked_versions()),
    ];
    for (key, value) in env {
        println!("cargo:rustc-env={key}={}", value.unwrap_or_default());
    }
    println!("cargo:rerun-if-changed=build.rs");
    println!("cargo:rerun-if-changed=../../Cargo.lock");
}

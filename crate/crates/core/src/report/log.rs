//! JSON Lines run logs.
//!
//! Each run is written as one `run_header` line, one `improvement` line per
//! trajectory point and a closing `run_end` line. A run's lines go out in a
//! single `write_all` so concurrent readers never observe half a record.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{validate, FirstHit, RunRecord, Termination, TrajectoryPoint};

#[derive(Debug, Error)]
pub enum LogError {
    #[error("I/O error on run log: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed log line: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error("run {run} (line {line}) failed validation: {violations}")]
    Invalid {
        line: usize,
        run: String,
        violations: String,
    },
    #[error("log ends with an abort marker: {0}")]
    Aborted(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Abort on the first problem.
    #[default]
    Strict,
    /// Skip malformed lines and broken runs, counting them.
    Lenient,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum LogLine {
    RunHeader {
        algorithm_id: String,
        instance_id: String,
        repetition: u32,
        run_index: u32,
        seed: u64,
        params: serde_json::Value,
    },
    Improvement {
        elapsed: f64,
        evals: u64,
        best_f: f64,
    },
    RunEnd {
        termination: Termination,
        time_used: f64,
        evals_used: u64,
        clamped_evals: u64,
        first_hits: Vec<FirstHit>,
    },
    Aborted {
        reason: String,
    },
}

fn lines_for(record: &RunRecord) -> Result<String, serde_json::Error> {
    let mut buf = serde_json::to_string(&LogLine::RunHeader {
        algorithm_id: record.algorithm_id.clone(),
        instance_id: record.instance_id.clone(),
        repetition: record.repetition,
        run_index: record.run_index,
        seed: record.seed,
        params: record.params.clone(),
    })?;
    buf.push('\n');
    for p in &record.trajectory {
        buf.push_str(&serde_json::to_string(&LogLine::Improvement {
            elapsed: p.elapsed,
            evals: p.evals,
            best_f: p.best_f,
        })?);
        buf.push('\n');
    }
    buf.push_str(&serde_json::to_string(&LogLine::RunEnd {
        termination: record.termination,
        time_used: record.time_used,
        evals_used: record.evals_used,
        clamped_evals: record.clamped_evals,
        first_hits: record.first_hits.clone(),
    })?);
    buf.push('\n');
    Ok(buf)
}

/// Serializes records as JSONL. On an I/O failure an `aborted` marker is
/// attempted before the error is returned.
pub fn write_run_log<'a, W: Write>(
    out: &mut W,
    records: impl IntoIterator<Item = &'a RunRecord>,
) -> Result<(), LogError> {
    for r in records {
        let chunk = lines_for(r).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        if let Err(e) = out.write_all(chunk.as_bytes()) {
            let marker = serde_json::to_string(&LogLine::Aborted {
                reason: e.to_string(),
            })
            .unwrap_or_default();
            let _ = out.write_all(marker.as_bytes());
            let _ = out.write_all(b"\n");
            return Err(e.into());
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_run_log_file<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a RunRecord>,
) -> Result<(), LogError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(true)
        .open(path)?;
    write_run_log(&mut f, records)?;
    f.sync_all()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLog {
    pub records: Vec<RunRecord>,
    /// Lines that were not valid log records (lenient mode).
    pub skipped_lines: Vec<LogIssue>,
    /// Runs dropped for structural or validation problems (lenient mode).
    pub rejected_runs: Vec<LogIssue>,
    /// Reason from an `aborted` marker, if present.
    pub aborted: Option<String>,
}

struct OpenRun {
    line: usize,
    record: RunRecord,
}

fn run_label(r: &RunRecord) -> String {
    format!(
        "{}/{} rep {} run {}",
        r.algorithm_id, r.instance_id, r.repetition, r.run_index
    )
}

pub fn parse_run_log<R: BufRead>(input: R, mode: ParseMode) -> Result<ParsedLog, LogError> {
    let strict = mode == ParseMode::Strict;
    let mut out = ParsedLog::default();
    let mut open: Option<OpenRun> = None;

    let reject = |out: &mut ParsedLog, issue: LogIssue| -> Result<(), LogError> {
        if strict {
            Err(LogError::Structure {
                line: issue.line,
                message: issue.message,
            })
        } else {
            out.rejected_runs.push(issue);
            Ok(())
        }
    };

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                if strict {
                    return Err(LogError::Malformed {
                        line: lineno,
                        message: e.to_string(),
                    });
                }
                out.skipped_lines.push(LogIssue {
                    line: lineno,
                    message: e.to_string(),
                });
                continue;
            }
        };
        match parsed {
            LogLine::RunHeader {
                algorithm_id,
                instance_id,
                repetition,
                run_index,
                seed,
                params,
            } => {
                if let Some(prev) = open.take() {
                    reject(
                        &mut out,
                        LogIssue {
                            line: prev.line,
                            message: format!("run {} has no run_end", run_label(&prev.record)),
                        },
                    )?;
                }
                open = Some(OpenRun {
                    line: lineno,
                    record: RunRecord {
                        algorithm_id,
                        instance_id,
                        repetition,
                        run_index,
                        seed,
                        params,
                        trajectory: Vec::new(),
                        first_hits: Vec::new(),
                        time_used: 0.0,
                        evals_used: 0,
                        clamped_evals: 0,
                        termination: Termination::BudgetExhausted,
                    },
                });
            }
            LogLine::Improvement {
                elapsed,
                evals,
                best_f,
            } => match open.as_mut() {
                Some(run) => run.record.trajectory.push(TrajectoryPoint {
                    elapsed,
                    evals,
                    best_f,
                }),
                None => reject(
                    &mut out,
                    LogIssue {
                        line: lineno,
                        message: "improvement outside a run".into(),
                    },
                )?,
            },
            LogLine::RunEnd {
                termination,
                time_used,
                evals_used,
                clamped_evals,
                first_hits,
            } => match open.take() {
                Some(mut run) => {
                    run.record.termination = termination;
                    run.record.time_used = time_used;
                    run.record.evals_used = evals_used;
                    run.record.clamped_evals = clamped_evals;
                    run.record.first_hits = first_hits;
                    match validate(&run.record) {
                        Ok(()) => out.records.push(run.record),
                        Err(v) => {
                            let violations = v
                                .iter()
                                .map(ToString::to_string)
                                .collect::<Vec<_>>()
                                .join(", ");
                            if strict {
                                return Err(LogError::Invalid {
                                    line: run.line,
                                    run: run_label(&run.record),
                                    violations,
                                });
                            }
                            out.rejected_runs.push(LogIssue {
                                line: run.line,
                                message: format!(
                                    "run {} invalid: {violations}",
                                    run_label(&run.record)
                                ),
                            });
                        }
                    }
                }
                None => reject(
                    &mut out,
                    LogIssue {
                        line: lineno,
                        message: "run_end without run_header".into(),
                    },
                )?,
            },
            LogLine::Aborted { reason } => {
                if strict {
                    return Err(LogError::Aborted(reason));
                }
                out.aborted = Some(reason);
            }
        }
    }
    if let Some(prev) = open.take() {
        reject(
            &mut out,
            LogIssue {
                line: prev.line,
                message: format!("run {} has no run_end", run_label(&prev.record)),
            },
        )?;
    }
    Ok(out)
}

pub fn read_run_log_file(path: &Path, mode: ParseMode) -> Result<ParsedLog, LogError> {
    parse_run_log(BufReader::new(File::open(path)?), mode)
}

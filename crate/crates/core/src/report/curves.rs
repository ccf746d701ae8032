//! CSV plot data and the ERT table.
//!
//! Floats use the shortest round-trip decimal form, infinities are written
//! as `inf` and missing values as empty fields.

use std::io::{Read, Write};

use thiserror::Error;

use crate::metrics::{EcdfCurve, MedianCurve, MedianPoint, ProfileCurve};
use crate::types::ErtResult;

pub const ECDF_HEADER: [&str; 4] = ["time", "fraction", "n_num", "n_den"];
pub const PROFILE_HEADER: [&str; 3] = ["tau", "rho", "solver"];
pub const MEDIAN_HEADER: [&str; 5] = ["time", "median", "ci_lo", "ci_hi", "solver"];
pub const ERT_HEADER: [&str; 7] = [
    "solver",
    "instance",
    "target",
    "ert",
    "success_rate",
    "successes",
    "runs",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("row {row}: {message}")]
    Field { row: usize, message: String },
}

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        ryu::Buffer::new().format_finite(v).to_string()
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => s.parse().map_err(|_| format!("invalid number {s:?}")),
    }
}

fn parse_opt(s: &str) -> Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>, CsvError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>, CsvError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if found != header {
        return Err(CsvError::Header {
            found,
            expected: header.iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(r.records().collect::<Result<_, _>>()?)
}

fn field<T>(row: usize, v: Result<T, String>) -> Result<T, CsvError> {
    v.map_err(|message| CsvError::Field { row, message })
}

pub fn write_ecdf_csv<W: Write>(out: W, curve: &EcdfCurve) -> Result<(), CsvError> {
    let mut w = writer(out, &ECDF_HEADER)?;
    for ((t, f), n) in curve.time_grid.iter().zip(&curve.fraction).zip(&curve.numerator) {
        w.write_record([
            format_f64(*t),
            format_f64(*f),
            n.to_string(),
            curve.denominator.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ecdf_csv<R: Read>(input: R) -> Result<EcdfCurve, CsvError> {
    let mut curve = EcdfCurve {
        time_grid: Vec::new(),
        fraction: Vec::new(),
        numerator: Vec::new(),
        denominator: 0,
    };
    for (i, rec) in read_rows(input, &ECDF_HEADER)?.iter().enumerate() {
        let row = i + 1;
        curve.time_grid.push(field(row, parse_f64(&rec[0]))?);
        curve.fraction.push(field(row, parse_f64(&rec[1]))?);
        curve
            .numerator
            .push(field(row, rec[2].parse().map_err(|_| "invalid n_num".into()))?);
        curve.denominator = field(row, rec[3].parse().map_err(|_| "invalid n_den".into()))?;
    }
    Ok(curve)
}

/// One corner of a profile step function as written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub tau: f64,
    pub rho: f64,
    pub solver: String,
}

/// Two rows per breakpoint: the value just before the jump and the value at it.
pub fn profile_rows(curves: &[ProfileCurve<f64>]) -> Vec<ProfileRow> {
    let mut rows = Vec::new();
    for c in curves {
        let mut prev = 0.0;
        for (&tau, &rho) in c.ratios.iter().zip(&c.rho) {
            rows.push(ProfileRow {
                tau,
                rho: prev,
                solver: c.solver_id.clone(),
            });
            rows.push(ProfileRow {
                tau,
                rho,
                solver: c.solver_id.clone(),
            });
            prev = rho;
        }
    }
    rows
}

/// Rebuilds step functions from [`profile_rows`] output.
pub fn curves_from_rows(rows: &[ProfileRow]) -> Vec<ProfileCurve<f64>> {
    let mut curves: Vec<ProfileCurve<f64>> = Vec::new();
    for pair in rows.chunks(2) {
        let at = &pair[pair.len() - 1];
        match curves.last_mut() {
            Some(c) if c.solver_id == at.solver => {
                c.ratios.push(at.tau);
                c.rho.push(at.rho);
            }
            _ => curves.push(ProfileCurve {
                solver_id: at.solver.clone(),
                ratios: vec![at.tau],
                rho: vec![at.rho],
            }),
        }
    }
    curves
}

pub fn write_profile_csv<W: Write>(out: W, curves: &[ProfileCurve<f64>]) -> Result<(), CsvError> {
    let mut w = writer(out, &PROFILE_HEADER)?;
    for r in profile_rows(curves) {
        w.write_record([format_f64(r.tau), format_f64(r.rho), r.solver])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile_csv<R: Read>(input: R) -> Result<Vec<ProfileRow>, CsvError> {
    read_rows(input, &PROFILE_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            Ok(ProfileRow {
                tau: field(i + 1, parse_f64(&rec[0]))?,
                rho: field(i + 1, parse_f64(&rec[1]))?,
                solver: rec[2].to_string(),
            })
        })
        .collect()
}

pub fn write_median_csv<W: Write>(
    out: W,
    curves: &[(String, MedianCurve)],
) -> Result<(), CsvError> {
    let mut w = writer(out, &MEDIAN_HEADER)?;
    for (solver, curve) in curves {
        for p in &curve.points {
            w.write_record([
                format_f64(p.time),
                format_opt(p.median),
                format_opt(p.ci_lo),
                format_opt(p.ci_hi),
                solver.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_median_csv<R: Read>(input: R) -> Result<Vec<(String, MedianCurve)>, CsvError> {
    let mut out: Vec<(String, MedianCurve)> = Vec::new();
    for (i, rec) in read_rows(input, &MEDIAN_HEADER)?.iter().enumerate() {
        let row = i + 1;
        let point = MedianPoint {
            time: field(row, parse_f64(&rec[0]))?,
            median: field(row, parse_opt(&rec[1]))?,
            ci_lo: field(row, parse_opt(&rec[2]))?,
            ci_hi: field(row, parse_opt(&rec[3]))?,
        };
        match out.last_mut() {
            Some((s, c)) if s == &rec[4] => c.points.push(point),
            _ => out.push((
                rec[4].to_string(),
                MedianCurve {
                    points: vec![point],
                },
            )),
        }
    }
    Ok(out)
}

/// One line of `ert_table.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErtRow {
    pub solver: String,
    pub instance: String,
    pub result: ErtResult<f64>,
}

pub fn write_ert_csv<W: Write>(out: W, rows: &[ErtRow]) -> Result<(), CsvError> {
    let mut w = writer(out, &ERT_HEADER)?;
    for r in rows {
        w.write_record([
            r.solver.clone(),
            r.instance.clone(),
            format_f64(r.result.target),
            format_f64(r.result.ert),
            format_f64(r.result.success_rate),
            r.result.successes.to_string(),
            r.result.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ert_csv<R: Read>(input: R) -> Result<Vec<ErtRow>, CsvError> {
    read_rows(input, &ERT_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 1;
            let count = |s: &str| field(row, s.parse::<usize>().map_err(|e| e.to_string()));
            Ok(ErtRow {
                solver: rec[0].to_string(),
                instance: rec[1].to_string(),
                result: ErtResult {
                    target: field(row, parse_f64(&rec[2]))?,
                    ert: field(row, parse_f64(&rec[3]))?,
                    success_rate: field(row, parse_f64(&rec[4]))?,
                    successes: count(&rec[5])?,
                    runs: count(&rec[6])?,
                },
            })
        })
        .collect()
}

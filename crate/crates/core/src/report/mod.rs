//! Run logs, plot data and the reproducibility manifest.
//!
//! Output layout of one experiment directory:
//!
//! ```text
//! manifest.json
//! effective_config.toml
//! ert_table.csv
//! rank_tests.csv
//! runs/<algorithm>/<instance>.jsonl
//! curves/ecdf_<algorithm>.csv
//! curves/median_<instance>.csv
//! curves/profile_q<k>.csv
//! ```

pub mod curves;
pub mod environment;
pub mod log;
pub mod manifest;

pub use curves::{
    format_f64, parse_f64, read_ecdf_csv, read_ert_csv, read_median_csv, read_profile_csv,
    write_ecdf_csv, write_ert_csv, write_median_csv, write_profile_csv, CsvError, ErtRow,
    ProfileRow,
};
pub use environment::{probe, Environment, Probe};
pub use log::{
    parse_run_log, read_run_log_file, write_run_log, write_run_log_file, LogError, ParseMode,
    ParsedLog,
};
pub use manifest::{audit, Audit, ItemStatus, Manifest, Section, Verdict};

/// Log path of one (algorithm, instance) pair relative to the experiment directory.
pub fn log_path(algorithm_id: &str, instance_id: &str) -> String {
    format!("runs/{algorithm_id}/{instance_id}.jsonl")
}

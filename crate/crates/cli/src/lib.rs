//! Verification harness: runs the suites against an example, writes the JSON
//! report and CSV tables, and sweeps convergence tables.

pub mod config;
pub mod describe;
pub mod error;
pub mod record;
pub mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{IntList, PPolicy, RunConfig};
pub use error::{HarnessError, Result};
pub use record::{ConvergenceCsvRow, Report, VerificationRecord};

use record::{convergence_csv, records_csv, write_atomic};
use suites::Context;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "AMALGAM_THREADS";

/// Sizes the global rayon pool from `AMALGAM_THREADS` when it is set. Only the
/// first call has an effect.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub struct VerifyOutcome {
    pub report: Report,
    pub convergence: Vec<ConvergenceCsvRow>,
}

/// All suites, in order.
pub fn verify(config: RunConfig) -> Result<VerifyOutcome> {
    let start = Instant::now();
    let ctx = Context::new(config)?;
    let mut records = Vec::new();
    records.extend(suites::algebra_suite(&ctx)?);
    records.extend(suites::freeness_suite(&ctx)?);
    records.extend(suites::isometry_suite(&ctx)?);
    records.extend(suites::sector_identity_suite(&ctx)?);
    records.extend(suites::expansion_suite(&ctx)?);
    records.extend(suites::span_suite(&ctx)?);
    records.extend(suites::group_suite(&ctx)?);
    records.extend(suites::path_graph_suite(&ctx)?);
    let rows = suites::convergence_rows(&ctx)?;
    records.extend(suites::convergence_suite(&ctx, &rows));
    let report = Report::new(ctx.config, records, start.elapsed().as_secs_f64());
    Ok(VerifyOutcome { report, convergence: rows })
}

/// Paths written by [`write_verify_outputs`].
pub struct OutputPaths {
    pub report: PathBuf,
    pub records: PathBuf,
    pub convergence: PathBuf,
}

pub fn output_paths(dir: &Path) -> OutputPaths {
    OutputPaths {
        report: dir.join("report.json"),
        records: dir.join("records.csv"),
        convergence: dir.join("convergence.csv"),
    }
}

pub fn write_verify_outputs(outcome: &VerifyOutcome) -> Result<OutputPaths> {
    let report = &outcome.report;
    let paths = output_paths(&report.config.out_dir);
    write_atomic(&paths.report, &serde_json::to_vec_pretty(report)?)?;
    write_atomic(&paths.records, &records_csv(&report.records)?)?;
    write_atomic(&paths.convergence, &convergence_csv(&outcome.convergence)?)?;
    Ok(paths)
}

/// The convergence table as CSV bytes.
pub fn convergence_table(config: RunConfig) -> Result<Vec<u8>> {
    let ctx = Context::new(config)?;
    convergence_csv(&suites::convergence_rows(&ctx)?)
}

/// Pretty JSON description of an example truncated at `cap`.
pub fn build_example(id: &str, cap: usize) -> Result<Vec<u8>> {
    let ex = config::load_example(id)?;
    let fock = ex.fock(cap)?;
    Ok(serde_json::to_vec_pretty(&describe::describe(&ex, &fock))?)
}

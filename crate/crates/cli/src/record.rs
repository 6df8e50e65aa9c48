//! Verification records, the JSON report and the CSV tables.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationRecord {
    pub suite: String,
    pub example: String,
    pub word_id: String,
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub d: Option<isize>,
    pub n: Option<usize>,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl VerificationRecord {
    /// A record that passes iff `measured < tolerance`.
    pub fn below(suite: &str, example: &str, word_id: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        VerificationRecord {
            suite: suite.to_string(),
            example: example.to_string(),
            word_id: word_id.into(),
            measured,
            tolerance,
            pass: measured < tolerance,
            ..Default::default()
        }
    }

    pub fn with_kpq(mut self, k: Option<usize>, p: Option<usize>, q: Option<usize>) -> Self {
        self.k = k;
        self.p = p;
        self.q = q;
        self
    }

    pub fn timed(mut self, secs: f64) -> Self {
        self.wall_time_s = secs;
        self
    }
}

/// Record columns without the timing, so that tables are reproducible.
#[derive(Serialize)]
struct RecordRow<'a> {
    suite: &'a str,
    example: &'a str,
    word_id: &'a str,
    k: Option<usize>,
    p: Option<usize>,
    q: Option<usize>,
    d: Option<isize>,
    n: Option<usize>,
    measured: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub pass: bool,
    /// Largest measured value outside the algebra checks, whose measurements
    /// include lower bounds, and the convergence rows, which carry a bound.
    pub max_residual: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub records: Vec<VerificationRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: RunConfig, records: Vec<VerificationRecord>, wall_time_s: f64) -> Self {
        let pass = records.iter().all(|r| r.pass);
        let max_residual = records
            .iter()
            .filter(|r| r.suite != "convergence" && r.suite != "algebra")
            .map(|r| r.measured)
            .fold(0.0, f64::max);
        Report { config, records, summary: Summary { pass, max_residual, wall_time_s } }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceCsvRow {
    pub example: String,
    pub word_id: String,
    pub q: usize,
    pub k: usize,
    pub p: usize,
    #[serde(rename = "sup_abs_Rn")]
    pub sup_abs_rn: f64,
    pub norm_error: f64,
    #[serde(rename = "bound_2q1_supRn")]
    pub bound: f64,
}

pub fn records_csv(records: &[VerificationRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(RecordRow {
            suite: &r.suite,
            example: &r.example,
            word_id: &r.word_id,
            k: r.k,
            p: r.p,
            q: r.q,
            d: r.d,
            n: r.n,
            measured: r.measured,
            tolerance: r.tolerance,
            pass: r.pass,
        })?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Rows are sorted by `(word_id, k)`.
pub fn convergence_csv(rows: &[ConvergenceCsvRow]) -> Result<Vec<u8>> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| (&a.word_id, a.k).cmp(&(&b.word_id, b.k)));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["example", "word_id", "q", "k", "p", "sup_abs_Rn", "norm_error", "bound_2q1_supRn"])?;
    for r in &sorted {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(word: &str, k: usize) -> ConvergenceCsvRow {
        ConvergenceCsvRow {
            example: "dinfty".into(),
            word_id: word.into(),
            q: 1,
            k,
            p: k / 2,
            sup_abs_rn: 0.5,
            norm_error: 0.25,
            bound: 1.5,
        }
    }

    #[test]
    fn convergence_csv_has_the_header_and_sorted_rows() {
        let text = String::from_utf8(convergence_csv(&[row("b", 6), row("a", 8), row("a", 6)]).unwrap()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "example,word_id,q,k,p,sup_abs_Rn,norm_error,bound_2q1_supRn");
        assert!(lines[1].starts_with("dinfty,a,1,6,"));
        assert!(lines[2].starts_with("dinfty,a,1,8,"));
        assert!(lines[3].starts_with("dinfty,b,1,6,"));
    }

    #[test]
    fn records_csv_omits_timing() {
        let r = VerificationRecord::below("freeness", "dinfty", "len1", 1e-16, 1e-10).timed(3.5);
        let text = String::from_utf8(records_csv(&[r]).unwrap()).unwrap();
        assert!(text.starts_with("suite,example,word_id,k,p,q,d,n,measured,tolerance,pass\n"));
        assert!(!text.contains("3.5"));
    }

    #[test]
    fn atomic_writes_replace_the_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}

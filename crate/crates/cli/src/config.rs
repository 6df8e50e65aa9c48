//! Run configuration and the parsers behind its command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use amalgam_core::examples::{example, from_json_str, Example};
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PPolicy {
    /// `p = ⌊k/2⌋`, i.e. `Ψ_k`.
    Half,
    Fixed(usize),
}

impl PPolicy {
    pub fn p_for(self, k: usize) -> usize {
        match self {
            PPolicy::Half => k / 2,
            PPolicy::Fixed(p) => p,
        }
    }
}

impl FromStr for PPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "half" {
            return Ok(PPolicy::Half);
        }
        s.parse().map(PPolicy::Fixed).map_err(|_| format!("p policy must be \"half\" or an integer, got {s:?}"))
    }
}

/// Inclusive integer ranges: `6..12`, `4` or `1,3,5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = |_| format!("cannot parse {s:?} as a range");
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim) {
            if let Some((a, b)) = part.split_once("..") {
                let b = b.strip_prefix('=').unwrap_or(b);
                let (a, b): (usize, usize) = (a.parse().map_err(bad)?, b.parse().map_err(bad)?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            } else {
                out.push(part.parse().map_err(bad)?);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(IntList(out))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Built-in example name or path to a JSON amalgam description.
    pub example: String,
    pub k_big: usize,
    pub ks: Vec<usize>,
    pub p_policy: PPolicy,
    pub qs: Vec<usize>,
    /// Random products sampled per pair of spans in the nesting suite.
    pub trials: usize,
    pub seed: u64,
    pub tol_structural: f64,
    pub tol_identity: f64,
    /// Truncation used by the span suite.
    pub dp_k: usize,
    /// Longest word in the freeness and group suites.
    pub max_word_len: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Defaults for everything but the example and the ranges.
    pub fn new(example: &str, ks: Vec<usize>, qs: Vec<usize>) -> Self {
        let max_k = ks.iter().copied().max().unwrap_or(0);
        let max_q = qs.iter().copied().max().unwrap_or(0);
        RunConfig {
            example: example.to_string(),
            k_big: default_k_big(max_k, max_q),
            ks,
            p_policy: PPolicy::Half,
            qs,
            trials: 3,
            seed: 42,
            tol_structural: 1e-10,
            tol_identity: 1e-8,
            dp_k: max_k.min(4),
            max_word_len: 6,
            out_dir: PathBuf::from("."),
        }
    }

    pub fn max_k(&self) -> usize {
        self.ks.iter().copied().max().unwrap_or(0)
    }

    pub fn max_q(&self) -> usize {
        self.qs.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.qs.is_empty() {
            return Err(HarnessError::Config("k and q ranges must be nonempty".into()));
        }
        if self.ks.contains(&0) {
            return Err(HarnessError::Config("k must be positive".into()));
        }
        if !(self.tol_structural > 0.0 && self.tol_identity > 0.0) {
            return Err(HarnessError::Config("tolerances must be positive".into()));
        }
        if self.k_big < self.max_k() + self.max_q() {
            return Err(HarnessError::Certificate(format!(
                "K_big = {} is below max(k) + max(q) = {}; results on E(→k) would not be exact",
                self.k_big,
                self.max_k() + self.max_q()
            )));
        }
        if self.dp_k > self.k_big {
            return Err(HarnessError::Config(format!("span truncation {} exceeds K_big", self.dp_k)));
        }
        if let PPolicy::Fixed(p) = self.p_policy {
            if self.ks.iter().any(|&k| p >= k) {
                return Err(HarnessError::Config(format!("fixed p = {p} must be below every k")));
            }
        }
        Ok(())
    }

    pub fn load_example(&self) -> Result<Example> {
        load_example(&self.example)
    }
}

pub fn default_k_big(max_k: usize, max_q: usize) -> usize {
    max_k + 2 * max_q + 1
}

pub fn load_example(id: &str) -> Result<Example> {
    match example(id) {
        Ok(ex) => Ok(ex),
        Err(amalgam_core::AmalgamError::UnknownExample(_)) if std::path::Path::new(id).is_file() => {
            Ok(from_json_str(&std::fs::read_to_string(id)?)?)
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse_inclusively() {
        assert_eq!("6..9".parse::<IntList>().unwrap().0, vec![6, 7, 8, 9]);
        assert_eq!("3".parse::<IntList>().unwrap().0, vec![3]);
        assert_eq!("5,1..2,2".parse::<IntList>().unwrap().0, vec![1, 2, 5]);
        assert_eq!("1..=2".parse::<IntList>().unwrap().0, vec![1, 2]);
        assert!("4..2".parse::<IntList>().is_err());
        assert!("x".parse::<IntList>().is_err());
    }

    #[test]
    fn p_policy_parses() {
        assert_eq!("half".parse::<PPolicy>().unwrap(), PPolicy::Half);
        assert_eq!("3".parse::<PPolicy>().unwrap(), PPolicy::Fixed(3));
        assert!("third".parse::<PPolicy>().is_err());
        assert_eq!(PPolicy::Half.p_for(7), 3);
    }

    #[test]
    fn small_k_big_is_a_certificate_error() {
        let mut c = RunConfig::new("m2diag", vec![4], vec![3]);
        assert!(c.validate().is_ok());
        c.k_big = 6;
        assert!(matches!(c.validate(), Err(HarnessError::Certificate(_))));
        c.k_big = 7;
        c.tol_identity = 0.0;
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn unknown_examples_are_reported() {
        assert!(load_example("dinfty").is_ok());
        assert!(matches!(load_example("no-such-thing"), Err(HarnessError::Core(_))));
    }
}

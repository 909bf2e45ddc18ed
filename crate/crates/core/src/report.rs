//! Uniform report shape shared by the checkers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != Verdict::Inconclusive
    }

    /// Worst of two verdicts: fail beats inconclusive beats pass.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `{statistic, bound, pass, n_samples, std_error}` plus a verdict, the seed
/// and any fitted constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub statistic: f64,
    pub bound: f64,
    pub pass: bool,
    pub n_samples: usize,
    pub std_error: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: &str, statistic: f64, bound: f64, pass: bool, n_samples: usize) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            bound,
            pass,
            n_samples,
            std_error: 0.0,
            verdict: Verdict::from_pass(pass),
            seed: None,
            extras: BTreeMap::new(),
        }
    }

    /// Passes iff `statistic > bound`.
    pub fn bound_below(name: &str, statistic: f64, bound: f64, n_samples: usize) -> Self {
        Self::new(name, statistic, bound, statistic > bound, n_samples)
    }

    /// Passes iff `statistic ≤ bound`.
    pub fn bound_above(name: &str, statistic: f64, bound: f64, n_samples: usize) -> Self {
        Self::new(name, statistic, bound, statistic <= bound, n_samples)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_std_error(mut self, std_error: f64) -> Self {
        self.std_error = std_error;
        self
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    /// Marks the report inconclusive; `pass` is left false.
    pub fn inconclusive(mut self) -> Self {
        self.pass = false;
        self.verdict = Verdict::Inconclusive;
        self
    }

    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extras.get(key).copied()
    }
}

//! Outcome of checking a certificate against a system.

use std::fmt;

use num_traits::{One, Zero};

use crate::value::{fmt_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// No violation up to `horizon`; the tail beyond it could not be decided.
    VerifiedUpToHorizon { horizon: u64 },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail => f.write_str("fail"),
            Verdict::VerifiedUpToHorizon { .. } => f.write_str("verified-up-to-horizon"),
        }
    }
}

/// One failed inequality: at `state`, the one-step image of the certificate
/// (`expected`) does not dominate the certificate value (`actual`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: String,
    pub expected: String,
    pub actual: String,
    pub detail: Option<String>,
}

impl Violation {
    pub fn new(state: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        Violation {
            state: state.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Per-state numeric entry of a report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReportValue {
    Rational(Rational),
    Infinity,
}

impl ReportValue {
    pub fn indicator(flag: bool) -> Self {
        ReportValue::Rational(if flag { Rational::one() } else { Rational::zero() })
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ReportValue::Rational(q) => Some(q),
            ReportValue::Infinity => None,
        }
    }
}

impl fmt::Display for ReportValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportValue::Rational(q) => f.write_str(&fmt_rational(q)),
            ReportValue::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    /// Certificate kind (`rank`, `arank`, `mrank`, `drank`, `ncrank`, `trank`).
    pub kind: String,
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    /// The bound `q∘b` certified at each state, in state order.
    pub bound: Vec<(String, ReportValue)>,
    /// Independently computed least fixed point, when requested.
    pub reference: Option<Vec<(String, ReportValue)>>,
    /// `true` iff the certificate equals its one-step image everywhere.
    pub fixed_point: bool,
    /// Parameters echoed for reproducibility.
    pub parameters: Vec<(String, String)>,
}

impl CheckReport {
    pub fn new(
        kind: &str,
        violations: Vec<Violation>,
        bound: Vec<(String, ReportValue)>,
        fixed_point: bool,
    ) -> Self {
        let verdict = if violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckReport {
            kind: kind.to_string(),
            verdict,
            violations,
            bound,
            reference: None,
            fixed_point,
            parameters: Vec::new(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_reference(mut self, reference: Vec<(String, ReportValue)>) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn bound_of(&self, state: &str) -> Option<&ReportValue> {
        self.bound.iter().find(|(s, _)| s == state).map(|(_, v)| v)
    }

    /// States whose certified bound equals 1.
    pub fn certified_states(&self) -> Vec<&str> {
        self.bound
            .iter()
            .filter(|(_, v)| v.as_rational().is_some_and(|q| q.is_one()))
            .map(|(s, _)| s.as_str())
            .collect()
    }
}

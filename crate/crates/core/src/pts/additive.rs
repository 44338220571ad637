//! `ε`-additive ranking supermartingales.

use num_traits::Zero;

use super::{expected_hitting_time, PtsCoalgebra, PtsError};
use crate::error::ModelError;
use crate::fixpoint::{check_postfixed, Domain, ValueTable};
use crate::report::{CheckReport, ReportValue, Violation};
use crate::value::{Extended, Rational};

/// `[0, ∞]` ordered by reversed numeric order, so `∞` is bottom.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdditiveDomain;

impl Domain for AdditiveDomain {
    type Value = Extended;

    fn leq(&self, a: &Extended, b: &Extended) -> bool {
        a >= b
    }

    fn bottom(&self) -> Extended {
        Extended::Infinity
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveCert {
    epsilon: Rational,
    values: Vec<Extended>,
}

impl AdditiveCert {
    pub fn new(epsilon: Rational, values: Vec<Extended>) -> Result<Self, ModelError> {
        if epsilon <= Rational::zero() {
            return Err(ModelError::InvalidCertificate(
                "epsilon must be positive".into(),
            ));
        }
        if values.iter().any(|v| !v.is_nonnegative()) {
            return Err(ModelError::InvalidCertificate(
                "additive values must be non-negative".into(),
            ));
        }
        Ok(AdditiveCert { epsilon, values })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn values(&self) -> &[Extended] {
        &self.values
    }
}

/// `Φ_{c,r'}`: 0 on accepting states, `Σ τ(x)(x')·b(x') + ε` elsewhere.
pub fn additive_step<'a>(
    c: &'a PtsCoalgebra,
    epsilon: &'a Rational,
) -> impl Fn(&ValueTable<Extended>) -> ValueTable<Extended> + 'a {
    move |b| {
        (0..c.len())
            .map(|x| {
                if c.is_accepting(x) {
                    Extended::zero()
                } else {
                    &c.expect_extended(x, b.as_slice()) + &Extended::Finite(epsilon.clone())
                }
            })
            .collect()
    }
}

fn finite_indicator(c: &PtsCoalgebra, values: &[Extended]) -> Vec<(String, ReportValue)> {
    values
        .iter()
        .enumerate()
        .map(|(x, v)| (c.name(x).to_string(), ReportValue::indicator(v.is_finite())))
        .collect()
}

/// Passes iff `Σ τ(x)(x')·b(x') + ε ≤ b(x)` at every non-accepting state.
/// The bound is 1 exactly where the certificate is finite.
pub fn check_additive(c: &PtsCoalgebra, cert: &AdditiveCert) -> Result<CheckReport, PtsError> {
    if cert.values.len() != c.len() {
        return Err(PtsError::Coverage {
            expected: c.len(),
            found: cert.values.len(),
        });
    }
    let table = ValueTable::new(cert.values.clone());
    let step = additive_step(c, &cert.epsilon);
    let violations = check_postfixed(&AdditiveDomain, &step, &table)
        .into_iter()
        .map(|v| {
            Violation::new(c.name(v.state), v.step_value, v.candidate)
                .with_detail("expected value plus epsilon exceeds the certificate")
        })
        .collect();
    let fixed_point = step(&table) == table;
    Ok(CheckReport::new(
        "arank",
        violations,
        finite_indicator(c, &cert.values),
        fixed_point,
    )
    .with_parameter("epsilon", crate::value::fmt_rational(&cert.epsilon)))
}

/// Checks `ε·E(x) ≤ b(x)` everywhere, where `E` is the exact expected hitting
/// time. The certificate must pass [`check_additive`] first. The reference
/// column holds `ε·E`.
pub fn verify_additive_dominates(
    c: &PtsCoalgebra,
    cert: &AdditiveCert,
) -> Result<CheckReport, PtsError> {
    let base = check_additive(c, cert)?;
    if !base.passed() {
        return Err(PtsError::CertificateInvalid {
            violations: base.violations.len(),
        });
    }
    let scaled: Vec<Extended> = expected_hitting_time(c)
        .iter()
        .map(|e| match e {
            Extended::Finite(q) => Extended::Finite(q * &cert.epsilon),
            Extended::Infinity => Extended::Infinity,
        })
        .collect();
    let violations = scaled
        .iter()
        .zip(&cert.values)
        .enumerate()
        .filter(|(_, (lower, b))| lower > b)
        .map(|(x, (lower, b))| {
            Violation::new(c.name(x), lower, b)
                .with_detail("certificate is below epsilon times the expected hitting time")
        })
        .collect();
    let reference = scaled
        .iter()
        .enumerate()
        .map(|(x, v)| {
            let value = match v {
                Extended::Finite(q) => ReportValue::Rational(q.clone()),
                Extended::Infinity => ReportValue::Infinity,
            };
            (c.name(x).to_string(), value)
        })
        .collect();
    Ok(CheckReport::new(
        "arank-dominance",
        violations,
        finite_indicator(c, &cert.values),
        base.fixed_point,
    )
    .with_reference(reference)
    .with_parameter("epsilon", crate::value::fmt_rational(&cert.epsilon)))
}

//! `γ`-scaled non-counting supermartingales.
//!
//! A table `b : X → [0,1]` with `γ·Σ τ(x)(x')·b(x') ≥ b(x)` off the
//! accepting states is itself a lower bound on reachability. Accepting
//! states only need `b(x) ∈ [0,1]`.

use num_traits::{One, Zero};

use super::{check_gamma, PtsCoalgebra, PtsError};
use crate::error::ModelError;
use crate::fixpoint::{check_postfixed, Domain, ValueTable};
use crate::report::{CheckReport, ReportValue, Violation};
use crate::value::{fmt_rational, Rational};

/// `[0,1]` with its usual order.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitDomain;

impl Domain for UnitDomain {
    type Value = Rational;

    fn leq(&self, a: &Rational, b: &Rational) -> bool {
        a <= b
    }

    fn bottom(&self) -> Rational {
        Rational::zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonCountingCert {
    gamma: Rational,
    values: Vec<Rational>,
}

impl NonCountingCert {
    pub fn new(gamma: Rational, values: Vec<Rational>) -> Result<Self, ModelError> {
        check_gamma(&gamma).map_err(|e| ModelError::InvalidCertificate(e.to_string()))?;
        if values
            .iter()
            .any(|v| *v < Rational::zero() || *v > Rational::one())
        {
            return Err(ModelError::InvalidCertificate(
                "non-counting values must lie in [0,1]".into(),
            ));
        }
        Ok(NonCountingCert { gamma, values })
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

/// 1 on accepting states, `γ·Σ τ(x)(x')·b(x')` elsewhere.
pub fn noncounting_step<'a>(
    c: &'a PtsCoalgebra,
    gamma: &'a Rational,
) -> impl Fn(&ValueTable<Rational>) -> ValueTable<Rational> + 'a {
    move |b| {
        (0..c.len())
            .map(|x| {
                if c.is_accepting(x) {
                    Rational::one()
                } else {
                    gamma * c.expect(x, b.as_slice())
                }
            })
            .collect()
    }
}

/// The bound of a passing certificate is the certificate itself.
pub fn check_noncounting(
    c: &PtsCoalgebra,
    cert: &NonCountingCert,
) -> Result<CheckReport, PtsError> {
    if cert.values.len() != c.len() {
        return Err(PtsError::Coverage {
            expected: c.len(),
            found: cert.values.len(),
        });
    }
    let table = ValueTable::new(cert.values.clone());
    let step = noncounting_step(c, &cert.gamma);
    let violations = check_postfixed(&UnitDomain, &step, &table)
        .into_iter()
        .map(|v| {
            Violation::new(
                c.name(v.state),
                fmt_rational(&v.step_value),
                fmt_rational(&v.candidate),
            )
            .with_detail("discounted expectation is below the certificate")
        })
        .collect();
    let fixed_point = step(&table) == table;
    let bound = cert
        .values
        .iter()
        .enumerate()
        .map(|(x, v)| (c.name(x).to_string(), ReportValue::Rational(v.clone())))
        .collect();
    Ok(CheckReport::new("ncrank", violations, bound, fixed_point)
        .with_parameter("gamma", fmt_rational(&cert.gamma)))
}

//! `α`-multiplicative ranking supermartingales with floor `δ`.

use num_traits::{One, Zero};

use super::{PtsCoalgebra, PtsError};
use crate::error::ModelError;
use crate::fixpoint::ValueTable;
use crate::report::{CheckReport, ReportValue, Violation};
use crate::value::{fmt_rational, Extended, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeCert {
    alpha: Rational,
    delta: Rational,
    values: Vec<Extended>,
}

impl MultiplicativeCert {
    pub fn new(alpha: Rational, delta: Rational, values: Vec<Extended>) -> Result<Self, ModelError> {
        if alpha <= Rational::zero() || alpha >= Rational::one() {
            return Err(ModelError::InvalidCertificate("alpha must lie in (0,1)".into()));
        }
        if delta <= Rational::zero() {
            return Err(ModelError::InvalidCertificate("delta must be positive".into()));
        }
        if values.iter().any(|v| !v.is_nonnegative()) {
            return Err(ModelError::InvalidCertificate(
                "multiplicative values must be non-negative".into(),
            ));
        }
        Ok(MultiplicativeCert {
            alpha,
            delta,
            values,
        })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn values(&self) -> &[Extended] {
        &self.values
    }
}

/// The algebra step on `[αδ, ∞]`: `αδ` on accepting states and
/// `(1/α)·Σ τ(x)(x')·b(x')` elsewhere.
pub fn multiplicative_step<'a>(
    c: &'a PtsCoalgebra,
    alpha: &'a Rational,
    delta: &'a Rational,
) -> impl Fn(&ValueTable<Extended>) -> ValueTable<Extended> + 'a {
    move |b| {
        (0..c.len())
            .map(|x| {
                if c.is_accepting(x) {
                    Extended::Finite(alpha * delta)
                } else {
                    c.expect_extended(x, b.as_slice()).scale(&(Rational::one() / alpha))
                }
            })
            .collect()
    }
}

/// Passes iff `Σ τ(x)(x')·b(x') ≤ α·b(x)` and `b(x) ≥ δ` at every
/// non-accepting state. The bound is 1 exactly where the value is finite.
pub fn check_multiplicative(
    c: &PtsCoalgebra,
    cert: &MultiplicativeCert,
) -> Result<CheckReport, PtsError> {
    if cert.values.len() != c.len() {
        return Err(PtsError::Coverage {
            expected: c.len(),
            found: cert.values.len(),
        });
    }
    let floor = Extended::Finite(cert.delta.clone());
    let mut violations = Vec::new();
    for x in (0..c.len()).filter(|&x| !c.is_accepting(x)) {
        let b = &cert.values[x];
        if *b < floor {
            violations.push(
                Violation::new(c.name(x), &floor, b).with_detail("value below the delta floor"),
            );
        }
        let mean = c.expect_extended(x, &cert.values);
        let contracted = b.scale(&cert.alpha);
        if mean > contracted {
            violations.push(
                Violation::new(c.name(x), &mean, &contracted)
                    .with_detail("expected successor value exceeds alpha times the certificate"),
            );
        }
    }
    let table = ValueTable::new(cert.values.clone());
    let fixed_point = multiplicative_step(c, &cert.alpha, &cert.delta)(&table) == table;
    let bound = cert
        .values
        .iter()
        .enumerate()
        .map(|(x, v)| (c.name(x).to_string(), ReportValue::indicator(v.is_finite())))
        .collect();
    Ok(CheckReport::new("mrank", violations, bound, fixed_point)
        .with_parameter("alpha", fmt_rational(&cert.alpha))
        .with_parameter("delta", fmt_rational(&cert.delta)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::pts::tests::{ex2_8, notcorec};
    use crate::value::{int, rat};
    use Extended::{Finite, Infinity};

    /// The finite fixed point for the four-state witness, `α > 1/2`.
    pub(crate) fn mult_b1(alpha: &Rational, delta: &Rational) -> Vec<Extended> {
        let one = Rational::one();
        let x1 = alpha * delta / (alpha * int(2) - &one);
        let x0 = rat(1, 2) * (&one / alpha) * (&x1 + delta);
        vec![Finite(x0), Finite(x1), Finite(delta.clone()), Finite(alpha * delta)]
    }

    #[test]
    fn both_fixed_points_pass() {
        let c = notcorec();
        for (alpha, delta) in [(rat(3, 4), int(1)), (rat(2, 3), rat(5, 2)), (rat(9, 10), rat(1, 7))] {
            let b2 = vec![Infinity, Infinity, Finite(delta.clone()), Finite(&alpha * &delta)];
            for values in [mult_b1(&alpha, &delta), b2] {
                let cert = MultiplicativeCert::new(alpha.clone(), delta.clone(), values).unwrap();
                let report = check_multiplicative(&c, &cert).unwrap();
                assert!(report.passed(), "{report:?}");
                assert!(report.fixed_point);
            }
        }
    }

    #[test]
    fn floor_violation() {
        let c = notcorec();
        let alpha = rat(3, 4);
        let mut values = mult_b1(&alpha, &int(1));
        values[2] = Finite(rat(1, 2));
        let cert = MultiplicativeCert::new(alpha, int(1), values).unwrap();
        let report = check_multiplicative(&c, &cert).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.state == "x2" && v.detail.as_deref() == Some("value below the delta floor")));
    }

    #[test]
    fn hand_built_certificate_on_two_branch_example() {
        // x1: (1/2)·b(x1) + (1/2)·b(x2) = 3/2 + 1/2 = 2 ≤ (3/4)·3
        let c = ex2_8();
        let cert = MultiplicativeCert::new(
            rat(3, 4),
            int(1),
            vec![Infinity, Finite(int(3)), Finite(int(1)), Infinity],
        )
        .unwrap();
        let report = check_multiplicative(&c, &cert).unwrap();
        assert!(report.passed());
        assert_eq!(report.certified_states(), vec!["x1", "x2"]);
    }

    #[test]
    fn parameters_validated() {
        assert!(MultiplicativeCert::new(int(1), int(1), vec![]).is_err());
        assert!(MultiplicativeCert::new(rat(1, 2), int(0), vec![]).is_err());
    }
}

//! Multiplicative to additive supermartingale conversion.
//!
//! `p'(a) = ε·(log_{1/α}(a/δ) + 1)` on `[αδ, ∞]`, applied after clamping each
//! value to at least `αδ`. The logarithm is irrational on most rational
//! inputs, so it is evaluated in high-precision binary floating point and
//! the additive condition of the image is re-checked with a small slack.

use dashu_float::round::mode::HalfAway;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{check_multiplicative, AdditiveCert, MultiplicativeCert, PtsCoalgebra, PtsError};
use crate::report::{CheckReport, ReportValue, Violation};
use crate::value::{fmt_rational, Extended, Rational};

pub const DEFAULT_PRECISION: usize = 128;

/// Slack allowed when re-checking the converted certificate: `10^{-9}`.
pub const CONVERSION_TOLERANCE: (i64, i64) = (1, 1_000_000_000);

type Float = FBig<HalfAway, 2>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conversion {
    pub cert: AdditiveCert,
    /// Additive condition of `cert`, checked with the tolerance slack.
    pub report: CheckReport,
}

fn to_ibig(n: &BigInt) -> IBig {
    n.to_string().parse().expect("decimal integers parse")
}

fn to_float(q: &Rational, precision: usize) -> Float {
    let num = Float::from(to_ibig(q.numer())).with_precision(precision).value();
    let den = Float::from(to_ibig(q.denom())).with_precision(precision).value();
    num / den
}

fn to_rational(x: &Float) -> Rational {
    let (mantissa, exponent) = x.repr().clone().into_parts();
    let m: BigInt = mantissa.to_string().parse().expect("decimal integers parse");
    let scale = BigInt::one() << exponent.unsigned_abs();
    if exponent >= 0 {
        Rational::from_integer(m * scale)
    } else {
        Rational::new(m, scale)
    }
}

/// `log_{1/α}(t)` when `t` is an exact integer power `(1/α)^k`, `k ≥ -1`.
fn exact_log(t: &Rational, alpha: &Rational) -> Option<i64> {
    if t == alpha {
        return Some(-1);
    }
    let mut cur = t.clone();
    let mut k = 0;
    while cur > Rational::one() && k < 4096 {
        cur *= alpha;
        k += 1;
    }
    cur.is_one().then_some(k)
}

fn p_prime(
    a: &Extended,
    alpha: &Rational,
    delta: &Rational,
    epsilon: &Rational,
    precision: usize,
) -> Extended {
    let Extended::Finite(a) = a else {
        return Extended::Infinity;
    };
    let floor = alpha * delta;
    let a = if *a < floor { floor } else { a.clone() };
    let t = &a / delta;
    if let Some(k) = exact_log(&t, alpha) {
        return Extended::Finite(epsilon * Rational::from_integer(BigInt::from(k + 1)));
    }
    let log = to_float(&t, precision).ln() / to_float(&(Rational::one() / alpha), precision).ln();
    let value = epsilon * (to_rational(&log) + Rational::one());
    Extended::Finite(if value < Rational::zero() {
        Rational::zero()
    } else {
        value
    })
}

/// Converts a passing multiplicative certificate. The multiplicative
/// condition is checked exactly first; the image's additive condition is
/// then re-checked allowing [`CONVERSION_TOLERANCE`].
pub fn convert_multiplicative(
    c: &PtsCoalgebra,
    cert: &MultiplicativeCert,
    epsilon: &Rational,
    precision: usize,
) -> Result<Conversion, PtsError> {
    if *epsilon <= Rational::zero() {
        return Err(PtsError::InvalidParameter("epsilon must be positive".into()));
    }
    if precision < 32 {
        return Err(PtsError::InvalidParameter("precision must be at least 32 bits".into()));
    }
    let base = check_multiplicative(c, cert)?;
    let floor = Extended::Finite(cert.delta().clone());
    if let Some(x) = (0..c.len()).find(|&x| !c.is_accepting(x) && cert.values()[x] < floor) {
        return Err(PtsError::BelowDelta {
            state: c.name(x).to_string(),
        });
    }
    if !base.passed() {
        return Err(PtsError::CertificateInvalid {
            violations: base.violations.len(),
        });
    }
    let values: Vec<Extended> = cert
        .values()
        .iter()
        .map(|a| p_prime(a, cert.alpha(), cert.delta(), epsilon, precision))
        .collect();
    let slack = Rational::new(CONVERSION_TOLERANCE.0.into(), CONVERSION_TOLERANCE.1.into());
    let mut violations = Vec::new();
    for x in (0..c.len()).filter(|&x| !c.is_accepting(x)) {
        let lhs = &c.expect_extended(x, &values) + &Extended::Finite(epsilon.clone());
        let rhs = &values[x] + &Extended::Finite(slack.clone());
        if lhs > rhs {
            violations.push(
                Violation::new(c.name(x), &lhs, &values[x])
                    .with_detail("converted certificate misses the additive condition"),
            );
        }
    }
    let bound = values
        .iter()
        .enumerate()
        .map(|(x, v)| (c.name(x).to_string(), ReportValue::indicator(v.is_finite())))
        .collect();
    let report = CheckReport::new("arank", violations, bound, false)
        .with_parameter("epsilon", fmt_rational(epsilon))
        .with_parameter("precision", precision)
        .with_parameter("tolerance", "1e-9");
    let cert = AdditiveCert::new(epsilon.clone(), values).expect("converted values are valid");
    Ok(Conversion { cert, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pts::multiplicative::tests::mult_b1;
    use crate::pts::tests::notcorec;
    use crate::value::{int, rat};

    #[test]
    fn exact_special_points() {
        let (alpha, delta, eps) = (rat(3, 4), int(2), rat(1, 3));
        let at = |a: Rational| p_prime(&Extended::Finite(a), &alpha, &delta, &eps, 128);
        assert_eq!(at(delta.clone()), Extended::Finite(eps.clone()));
        assert_eq!(at(&delta / &alpha), Extended::Finite(&eps * int(2)));
        assert_eq!(at(&alpha * &delta), Extended::zero());
        assert_eq!(at(int(0)), Extended::zero());
        assert_eq!(
            p_prime(&Extended::Infinity, &alpha, &delta, &eps, 128),
            Extended::Infinity
        );
    }

    #[test]
    fn irrational_point_is_accurate() {
        // log_{4/3}(3/2) ≈ 1.409420839653209
        let v = p_prime(&Extended::Finite(rat(3, 2)), &rat(3, 4), &int(1), &int(1), 128);
        let got = v.finite().unwrap().clone();
        let want = rat(2_409_420_839_653, 1_000_000_000_000);
        let err = if got > want { &got - &want } else { &want - &got };
        assert!(err < rat(1, 1_000_000_000));
    }

    #[test]
    fn converted_witness_is_additive() {
        let c = notcorec();
        let (alpha, delta) = (rat(3, 4), int(1));
        let cert = MultiplicativeCert::new(alpha.clone(), delta.clone(), mult_b1(&alpha, &delta))
            .unwrap();
        for eps in [int(1), rat(1, 2)] {
            let conv = convert_multiplicative(&c, &cert, &eps, DEFAULT_PRECISION).unwrap();
            assert!(conv.report.passed(), "{:?}", conv.report);
            assert!(conv.cert.values().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn invalid_input_rejected() {
        let c = notcorec();
        let alpha = rat(3, 4);
        let mut values = mult_b1(&alpha, &int(1));
        values[1] = Extended::Finite(rat(1, 2));
        let cert = MultiplicativeCert::new(alpha, int(1), values).unwrap();
        assert_eq!(
            convert_multiplicative(&c, &cert, &int(1), 128),
            Err(PtsError::BelowDelta { state: "x1".into() })
        );
    }
}

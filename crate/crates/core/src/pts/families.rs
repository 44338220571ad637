//! Parameterized finite systems.

use num_bigint::BigInt;
use num_traits::One;

use super::{NonCountingCert, PtsCoalgebra};
use crate::value::{pow, Rational};

fn half_pow(i: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2).pow(i))
}

/// Branching into delayed chains, truncated at `k` branches.
///
/// From `x`, branch `i ∈ 1..=k` is taken with probability `2^{-i}`; it is a
/// deterministic chain `x{i}_1 → … → x{i}_{2^i}` whose last state is
/// accepting, so the hitting time along branch `i` is exactly `2^i`. The
/// leftover mass `2^{-k}` goes to the non-accepting self-loop `sink`. The
/// untruncated system reaches almost surely with infinite expected time;
/// the truncation reaches with probability `1 - 2^{-k}`.
pub fn rankdom2(k: u32) -> PtsCoalgebra {
    assert!((1..=16).contains(&k), "truncation depth must lie in 1..=16");
    let mut names = vec!["x".to_string()];
    let mut next = vec![Vec::new()];
    let mut accepting = vec![false];
    for i in 1..=k {
        let len = 1usize << i;
        let first = names.len();
        next[0].push((first, half_pow(i)));
        for j in 1..=len {
            names.push(format!("x{i}_{j}"));
            let me = names.len() - 1;
            let succ = if j < len { me + 1 } else { me };
            next.push(vec![(succ, Rational::one())]);
            accepting.push(j == len);
        }
    }
    let sink = names.len();
    names.push("sink".to_string());
    next.push(vec![(sink, Rational::one())]);
    accepting.push(false);
    next[0].push((sink, half_pow(k)));
    PtsCoalgebra::new(names, next, accepting).expect("family is well formed")
}

/// `1 - 2^{-k}`, the reachability probability of `x` in [`rankdom2`].
pub fn rankdom2_reach(k: u32) -> Rational {
    Rational::one() - half_pow(k)
}

/// `b(x) = Σ_i γ^{2^i}/2^i`, `b(x{i}_j) = γ^{2^i - j}`, `b(sink) = 0`.
pub fn rankdom2_noncounting_cert(k: u32, gamma: &Rational) -> NonCountingCert {
    let c = rankdom2(k);
    let mut values = vec![Rational::from_integer(0.into()); c.len()];
    let mut root = Rational::from_integer(0.into());
    let mut idx = 1;
    for i in 1..=k {
        let len = 1u64 << i;
        root += pow(gamma, len) * half_pow(i);
        for j in 1..=len {
            values[idx] = pow(gamma, len - j);
            idx += 1;
        }
    }
    values[0] = root;
    NonCountingCert::new(gamma.clone(), values).expect("values lie in [0,1]")
}

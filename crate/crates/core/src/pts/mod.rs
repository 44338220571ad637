//! Probabilistic transition systems.
//!
//! Every state carries a finite distribution over successors and an
//! accepting flag. The liveness semantics is the probability of eventually
//! reaching an accepting state, i.e. the least fixed point of
//! `Φ(f)(x) = 1` on accepting states and `Σ τ(x)(x')·f(x')` elsewhere.

mod additive;
mod convert;
mod distribution;
mod families;
mod multiplicative;
mod noncounting;

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::error::ModelError;
use crate::game::check_unique;
use crate::linalg;
use crate::value::{fmt_rational, int, Extended, Rational};

pub use additive::{
    additive_step, check_additive, verify_additive_dominates, AdditiveCert, AdditiveDomain,
};
pub use convert::{convert_multiplicative, Conversion, DEFAULT_PRECISION, CONVERSION_TOLERANCE};
pub use distribution::{
    check_distribution_ranking, distribution_step, synthesize_hitting_distribution,
    DistCert, Geometric, TailSpec, ANALYTIC_SCAN_LIMIT,
};
pub use families::{rankdom2, rankdom2_noncounting_cert, rankdom2_reach};
pub use multiplicative::{check_multiplicative, multiplicative_step, MultiplicativeCert};
pub use noncounting::{check_noncounting, noncounting_step, NonCountingCert, UnitDomain};

/// Per-state probability, indexed like the states of the system.
pub type ReachVector = Vec<Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtsCoalgebra {
    names: Vec<String>,
    next: Vec<Vec<(usize, Rational)>>,
    accepting: Vec<bool>,
}

impl PtsCoalgebra {
    /// Successor lists are sorted by state index. Each must be a proper
    /// distribution: strictly positive weights summing to exactly 1.
    pub fn new(
        names: Vec<String>,
        next: Vec<Vec<(usize, Rational)>>,
        accepting: Vec<bool>,
    ) -> Result<Self, ModelError> {
        let n = names.len();
        if next.len() != n || accepting.len() != n {
            return Err(ModelError::Coverage {
                expected: n,
                found: next.len().min(accepting.len()),
            });
        }
        check_unique(&names)?;
        let mut sorted = Vec::with_capacity(n);
        for (x, mut dist) in next.into_iter().enumerate() {
            if dist.is_empty() {
                return Err(ModelError::MissingTransition(names[x].clone()));
            }
            dist.sort_by_key(|(y, _)| *y);
            let mut sum = Rational::zero();
            for (k, (y, p)) in dist.iter().enumerate() {
                if *y >= n {
                    return Err(ModelError::StateOutOfRange { index: *y, len: n });
                }
                if k > 0 && dist[k - 1].0 == *y {
                    return Err(ModelError::DuplicateSuccessor {
                        state: names[x].clone(),
                        successor: names[*y].clone(),
                    });
                }
                if !p.is_positive() {
                    return Err(ModelError::NonPositiveProbability {
                        state: names[x].clone(),
                        value: fmt_rational(p),
                    });
                }
                sum += p;
            }
            if !sum.is_one() {
                return Err(ModelError::ProbabilitySum {
                    state: names[x].clone(),
                    sum: fmt_rational(&sum),
                });
            }
            sorted.push(dist);
        }
        Ok(PtsCoalgebra {
            names,
            next: sorted,
            accepting,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn next(&self, state: usize) -> &[(usize, Rational)] {
        &self.next[state]
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    /// `Σ τ(x)(x')·f(x')`.
    pub fn expect(&self, x: usize, f: &[Rational]) -> Rational {
        self.next[x]
            .iter()
            .map(|(y, p)| p * &f[*y])
            .fold(Rational::zero(), |acc, t| acc + t)
    }

    /// `Σ τ(x)(x')·f(x')` over `[0, ∞]`; any `∞` successor makes it `∞`.
    pub fn expect_extended(&self, x: usize, f: &[Extended]) -> Extended {
        let mut sum = Rational::zero();
        for (y, p) in &self.next[x] {
            match &f[*y] {
                Extended::Finite(q) => sum += p * q,
                Extended::Infinity => return Extended::Infinity,
            }
        }
        Extended::Finite(sum)
    }

    /// States with a path to an accepting state in the support graph.
    pub fn can_reach_accepting(&self) -> Vec<bool> {
        let n = self.len();
        let mut preds = vec![Vec::new(); n];
        for x in 0..n {
            for (y, _) in &self.next[x] {
                preds[*y].push(x);
            }
        }
        let mut seen = self.accepting.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| seen[x]).collect();
        while let Some(y) = queue.pop_front() {
            for &x in &preds[y] {
                if !seen[x] {
                    seen[x] = true;
                    queue.push_back(x);
                }
            }
        }
        seen
    }
}

/// Name-based construction, mostly for fixtures and tests.
#[derive(Debug, Default)]
pub struct PtsBuilder {
    names: Vec<String>,
    accepting: Vec<bool>,
    moves: Vec<(String, Rational, String)>,
}

impl PtsBuilder {
    pub fn state(mut self, name: &str, accepting: bool) -> Self {
        self.names.push(name.to_string());
        self.accepting.push(accepting);
        self
    }

    pub fn edge(mut self, from: &str, p: Rational, to: &str) -> Self {
        self.moves.push((from.to_string(), p, to.to_string()));
        self
    }

    pub fn build(self) -> Result<PtsCoalgebra, ModelError> {
        let index: HashMap<&str, usize> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UndeclaredState(name.to_string()))
        };
        let mut next = vec![Vec::new(); self.names.len()];
        for (from, p, to) in &self.moves {
            next[lookup(from)?].push((lookup(to)?, p.clone()));
        }
        PtsCoalgebra::new(self.names.clone(), next, self.accepting.clone())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtsError {
    #[error("certificate covers {found} states, system has {expected}")]
    Coverage { expected: usize, found: usize },
    #[error("discount factor {0} outside [0,1)")]
    GammaOutOfRange(String),
    #[error("discount schedule is empty")]
    EmptySchedule,
    #[error("horizon must be at least 1")]
    HorizonZero,
    #[error("certificate is not valid ({violations} violations)")]
    CertificateInvalid { violations: usize },
    #[error("value at non-accepting state `{state}` is below delta")]
    BelowDelta { state: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Exact reachability probabilities: the least solution of `f = Φ(f)`.
///
/// States without a path to an accepting state are fixed to 0 first, which
/// leaves a non-singular system on the remaining non-accepting states.
pub fn pts_reach_exact(c: &PtsCoalgebra) -> ReachVector {
    let live = c.can_reach_accepting();
    let mut result = vec![Rational::zero(); c.len()];
    let unknowns: Vec<usize> = (0..c.len())
        .filter(|&x| live[x] && !c.is_accepting(x))
        .collect();
    for x in 0..c.len() {
        if c.is_accepting(x) {
            result[x] = Rational::one();
        }
    }
    let solution = solve_on(c, &unknowns, |_| Rational::one(), |y| {
        if c.is_accepting(y) {
            Some(Rational::one())
        } else if !live[y] {
            Some(Rational::zero())
        } else {
            None
        }
    })
    .expect("transient restriction is non-singular");
    for (x, v) in unknowns.iter().zip(solution) {
        result[*x] = v;
    }
    result
}

/// Solves `v(x) = Σ_y weight·τ(x)(y)·v(y)` on `unknowns`, where successors
/// outside `unknowns` contribute the constant `known(y)`.
fn solve_on(
    c: &PtsCoalgebra,
    unknowns: &[usize],
    weight: impl Fn(usize) -> Rational,
    known: impl Fn(usize) -> Option<Rational>,
) -> Option<Vec<Rational>> {
    solve_affine(c, unknowns, weight, known, |_| Rational::zero())
}

/// Solves `v(x) = offset(x) + weight(x)·Σ_y τ(x)(y)·v(y)` on `unknowns`.
fn solve_affine(
    c: &PtsCoalgebra,
    unknowns: &[usize],
    weight: impl Fn(usize) -> Rational,
    known: impl Fn(usize) -> Option<Rational>,
    offset: impl Fn(usize) -> Rational,
) -> Option<Vec<Rational>> {
    let mut slot = vec![usize::MAX; c.len()];
    for (i, &x) in unknowns.iter().enumerate() {
        slot[x] = i;
    }
    let m = unknowns.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (i, &x) in unknowns.iter().enumerate() {
        let w = weight(x);
        a[i][i] += Rational::one();
        b[i] = offset(x);
        for (y, p) in c.next(x) {
            let coeff = &w * p;
            if slot[*y] != usize::MAX {
                a[i][slot[*y]] -= coeff;
            } else {
                let v = known(*y).expect("successor outside the unknowns must be known");
                b[i] += coeff * v;
            }
        }
    }
    linalg::solve(a, b)
}

/// `f_n`: the probability of reaching an accepting state within `n - 1`
/// transitions, via `f_0 = 0` and `f_{k+1}(x) = 1` on accepting states,
/// `Σ τ(x)(x')·f_k(x')` elsewhere.
pub fn pts_reach_iter(c: &PtsCoalgebra, n: usize) -> ReachVector {
    let mut f = vec![Rational::zero(); c.len()];
    for _ in 0..n {
        f = (0..c.len())
            .map(|x| {
                if c.is_accepting(x) {
                    Rational::one()
                } else {
                    c.expect(x, &f)
                }
            })
            .collect();
    }
    f
}

/// Expected number of steps to the first accepting state; `∞` wherever the
/// reachability probability is below 1.
pub fn expected_hitting_time(c: &PtsCoalgebra) -> Vec<Extended> {
    let reach = pts_reach_exact(c);
    let sure: Vec<bool> = reach.iter().map(|r| r.is_one()).collect();
    let unknowns: Vec<usize> = (0..c.len())
        .filter(|&x| sure[x] && !c.is_accepting(x))
        .collect();
    // successors of almost-surely reaching states reach almost surely too
    let solution = solve_affine(
        c,
        &unknowns,
        |_| Rational::one(),
        |y| {
            debug_assert!(sure[y]);
            c.is_accepting(y).then(Rational::zero)
        },
        |_| Rational::one(),
    )
    .expect("transient restriction is non-singular");
    let mut result: Vec<Extended> = (0..c.len())
        .map(|x| {
            if c.is_accepting(x) {
                Extended::zero()
            } else {
                Extended::Infinity
            }
        })
        .collect();
    for (x, v) in unknowns.iter().zip(solution) {
        result[*x] = Extended::Finite(v);
    }
    result
}

pub(crate) fn check_gamma(gamma: &Rational) -> Result<(), PtsError> {
    if gamma.is_negative() || *gamma >= Rational::one() {
        return Err(PtsError::GammaOutOfRange(fmt_rational(gamma)));
    }
    Ok(())
}

/// The unique fixed point of the `γ`-discounted step: `v = 1` on accepting
/// states, `v(x) = γ·Σ τ(x)(x')·v(x')` elsewhere.
pub fn solve_discounted(c: &PtsCoalgebra, gamma: &Rational) -> Result<ReachVector, PtsError> {
    check_gamma(gamma)?;
    let unknowns: Vec<usize> = (0..c.len()).filter(|&x| !c.is_accepting(x)).collect();
    let solution = solve_on(c, &unknowns, |_| gamma.clone(), |y| {
        c.is_accepting(y).then(Rational::one)
    })
    .expect("discounted system is strictly diagonally dominant");
    let mut result = vec![Rational::one(); c.len()];
    for (x, v) in unknowns.iter().zip(solution) {
        result[*x] = v;
    }
    Ok(result)
}

/// Discounted values for a schedule of discount factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepTable {
    pub rows: Vec<(Rational, ReachVector)>,
    /// Per-state supremum over all rows.
    pub sup: ReachVector,
}

impl SweepTable {
    /// `gamma,<state>…` header, one row per discount factor, and a final
    /// `sup` row.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::from("gamma");
        for name in names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let mut line = |label: String, values: &[Rational]| {
            out.push_str(&label);
            for v in values {
                out.push(',');
                out.push_str(&fmt_rational(v));
            }
            out.push('\n');
        };
        for (gamma, values) in &self.rows {
            line(fmt_rational(gamma), values);
        }
        line("sup".to_string(), &self.sup);
        out
    }
}

/// Solves every discount factor independently (in parallel); rows keep the
/// schedule order.
pub fn gamma_sweep(c: &PtsCoalgebra, schedule: &[Rational]) -> Result<SweepTable, PtsError> {
    if schedule.is_empty() {
        return Err(PtsError::EmptySchedule);
    }
    for gamma in schedule {
        check_gamma(gamma)?;
    }
    let rows: Vec<(Rational, ReachVector)> = schedule
        .par_iter()
        .map(|g| (g.clone(), solve_discounted(c, g).expect("validated gamma")))
        .collect();
    let sup = (0..c.len())
        .map(|x| {
            rows.iter()
                .map(|(_, v)| &v[x])
                .max()
                .cloned()
                .expect("schedule is nonempty")
        })
        .collect();
    Ok(SweepTable { rows, sup })
}

/// `1 - 2^{-k}` for `k = 1..=k_max`.
pub fn default_gamma_schedule(k_max: u32) -> Vec<Rational> {
    (1..=k_max)
        .map(|k| int(1) - Rational::new(1.into(), num_bigint::BigInt::from(2).pow(k)))
        .collect()
}

/// States with reachability probability exactly 1.
pub fn almost_sure_states(c: &PtsCoalgebra) -> BTreeSet<usize> {
    pts_reach_exact(c)
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_one())
        .map(|(x, _)| x)
        .collect()
}

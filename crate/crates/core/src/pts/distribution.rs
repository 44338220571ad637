//! Distribution-valued ranking functions.
//!
//! Each state is assigned a distribution `φ` over `ℕ ∪ {∞}` read as "the
//! number of steps until acceptance". The certificate condition at a
//! non-accepting `x` is
//! `Σ τ(x)(x')·φ_{x'}([0, a-1]) ≥ φ_x([0, a])` for every `a ≥ 0`, with
//! `φ([0,-1]) = 0`. Accepting states are unconstrained. The certified lower
//! bound on reachability is `φ_x([0, ∞)) = 1 - φ_x(∞)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{pts_reach_exact, PtsCoalgebra, PtsError};
use crate::error::ModelError;
use crate::fixpoint::ValueTable;
use crate::report::{CheckReport, ReportValue, Verdict, Violation};
use crate::value::{fmt_rational, pow, Rational};

/// Largest stretch of indices past the horizon that the analytic tail check
/// evaluates pointwise before giving up with a bounded verdict.
pub const ANALYTIC_SCAN_LIMIT: u64 = 4096;

/// Mass `coeff·ratio^{i-start}` at every index `i ≥ start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometric {
    pub start: u64,
    pub coeff: Rational,
    pub ratio: Rational,
}

impl Geometric {
    pub fn total(&self) -> Rational {
        &self.coeff / (Rational::one() - &self.ratio)
    }

    /// Mass on `[start, a]`.
    fn mass_upto(&self, a: u64) -> Rational {
        if a < self.start {
            return Rational::zero();
        }
        let tail = pow(&self.ratio, a - self.start + 1);
        &self.coeff * (Rational::one() - tail) / (Rational::one() - &self.ratio)
    }
}

/// A distribution over `ℕ ∪ {∞}`: finitely many atoms, an optional geometric
/// tail above them, optional mass deferred to unspecified indices beyond a
/// cut-off, and an atom at `∞`. Masses total exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailSpec {
    atoms: BTreeMap<u64, Rational>,
    geo: Option<Geometric>,
    deferred: Option<(u64, Rational)>,
    inf_mass: Rational,
}

impl TailSpec {
    /// Zero atoms are dropped. Atoms must lie below the geometric tail.
    pub fn new(
        atoms: BTreeMap<u64, Rational>,
        geo: Option<Geometric>,
        deferred: Option<(u64, Rational)>,
        inf_mass: Rational,
    ) -> Result<Self, ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidCertificate(msg.to_string()));
        if atoms.values().any(|m| m.is_negative()) || inf_mass.is_negative() {
            return bad("masses must be non-negative");
        }
        let atoms: BTreeMap<u64, Rational> =
            atoms.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        let mut total = atoms.values().fold(Rational::zero(), |a, m| a + m) + &inf_mass;
        let geo = match geo {
            Some(g) if g.coeff.is_zero() => None,
            other => other,
        };
        if let Some(g) = &geo {
            if g.coeff.is_negative() {
                return bad("geometric coefficient must be non-negative");
            }
            if !g.ratio.is_positive() || g.ratio >= Rational::one() {
                return bad("geometric ratio must lie in (0,1)");
            }
            if atoms.keys().next_back().is_some_and(|&k| k >= g.start) {
                return bad("atoms must lie below the geometric tail");
            }
            total += g.total();
        }
        let deferred = match deferred {
            Some((_, m)) if m.is_zero() => None,
            other => other,
        };
        if let Some((after, mass)) = &deferred {
            if mass.is_negative() {
                return bad("deferred mass must be non-negative");
            }
            if geo.is_some() || atoms.keys().next_back().is_some_and(|k| k > after) {
                return bad("deferred mass must follow all explicit atoms");
            }
            total += mass;
        }
        if !total.is_one() {
            return Err(ModelError::InvalidCertificate(format!(
                "masses sum to {}, expected 1",
                fmt_rational(&total)
            )));
        }
        Ok(TailSpec {
            atoms,
            geo,
            deferred,
            inf_mass,
        })
    }

    /// All mass at index `n`.
    pub fn dirac(n: u64) -> Self {
        TailSpec {
            atoms: BTreeMap::from([(n, Rational::one())]),
            geo: None,
            deferred: None,
            inf_mass: Rational::zero(),
        }
    }

    /// All mass at `∞`.
    pub fn at_infinity() -> Self {
        TailSpec {
            atoms: BTreeMap::new(),
            geo: None,
            deferred: None,
            inf_mass: Rational::one(),
        }
    }

    pub fn atoms(&self) -> &BTreeMap<u64, Rational> {
        &self.atoms
    }

    pub fn geo(&self) -> Option<&Geometric> {
        self.geo.as_ref()
    }

    /// `(after, mass)`: mass at unspecified indices `> after`.
    pub fn deferred(&self) -> Option<(u64, &Rational)> {
        self.deferred.as_ref().map(|(a, m)| (*a, m))
    }

    pub fn inf_mass(&self) -> &Rational {
        &self.inf_mass
    }

    /// `φ([0, ∞))`.
    pub fn finite_mass(&self) -> Rational {
        Rational::one() - &self.inf_mass
    }

    /// `φ([0, a])`, or `None` when deferred mass makes it unknown.
    pub fn cdf(&self, a: u64) -> Option<Rational> {
        if self.deferred.as_ref().is_some_and(|(after, _)| a > *after) {
            return None;
        }
        let mut sum: Rational = self.atoms.range(..=a).map(|(_, m)| m).sum();
        if let Some(g) = &self.geo {
            sum += g.mass_upto(a);
        }
        Some(sum)
    }

    /// `φ([0, a])` for `a = 0..=horizon`, all known.
    fn cdf_table(&self, horizon: u64) -> Vec<Rational> {
        let mut out = Vec::with_capacity(horizon as usize + 1);
        let mut acc = Rational::zero();
        let mut geo_term = self.geo.as_ref().map(|g| g.coeff.clone());
        for a in 0..=horizon {
            if let Some(m) = self.atoms.get(&a) {
                acc += m;
            }
            if let (Some(g), Some(term)) = (&self.geo, geo_term.as_mut()) {
                if a >= g.start {
                    acc += &*term;
                    *term *= &g.ratio;
                }
            }
            out.push(acc.clone());
        }
        out
    }

    /// From this index on, `cdf(a) = constant - k·ratio^a`.
    fn closed_form_start(&self) -> u64 {
        let after_atoms = self.atoms.keys().next_back().map_or(0, |k| k + 1);
        match &self.geo {
            Some(g) => g.start.max(after_atoms),
            None => after_atoms,
        }
    }

    /// `(constant, k, ratio)` with `cdf(a) = constant - k·ratio^a` for
    /// `a ≥ closed_form_start()`; `k = 0` without a geometric tail.
    fn closed_form(&self) -> (Rational, Option<(Rational, Rational)>) {
        let constant = self.finite_mass();
        let decay = self.geo.as_ref().map(|g| {
            // Σ_{i=s}^{a} c·r^{i-s} = c/(1-r) - c·r/((1-r)·r^s)·r^a
            let k = &g.coeff * &g.ratio / ((Rational::one() - &g.ratio) * pow(&g.ratio, g.start));
            (k, g.ratio.clone())
        });
        (constant, decay)
    }
}

impl fmt::Display for TailSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .atoms
            .iter()
            .map(|(k, m)| format!("{k}: {}", fmt_rational(m)))
            .collect();
        if let Some(g) = &self.geo {
            parts.push(format!(
                "geo({}, {}, {})",
                g.start,
                fmt_rational(&g.coeff),
                fmt_rational(&g.ratio)
            ));
        }
        if let Some((after, m)) = &self.deferred {
            parts.push(format!("beyond({after}): {}", fmt_rational(m)));
        }
        if !self.inf_mass.is_zero() {
            parts.push(format!("inf: {}", fmt_rational(&self.inf_mass)));
        }
        write!(f, "{{ {} }}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistCert {
    horizon: u64,
    values: Vec<TailSpec>,
}

impl DistCert {
    /// Deferred mass must not start before the horizon, so every checked
    /// index has a known cdf.
    pub fn new(horizon: u64, values: Vec<TailSpec>) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::InvalidCertificate("horizon must be at least 1".into()));
        }
        if values
            .iter()
            .any(|t| t.deferred.as_ref().is_some_and(|(after, _)| *after < horizon))
        {
            return Err(ModelError::InvalidCertificate(
                "deferred mass starts before the horizon".into(),
            ));
        }
        Ok(DistCert { horizon, values })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn values(&self) -> &[TailSpec] {
        &self.values
    }

    pub fn value(&self, state: usize) -> &TailSpec {
        &self.values[state]
    }

    /// Same values, checked to a different horizon.
    pub fn with_horizon(&self, horizon: u64) -> Result<Self, ModelError> {
        DistCert::new(horizon, self.values.clone())
    }
}

/// One-step image restricted to cdfs on `0..=horizon`: `1` everywhere on
/// accepting states, `a ↦ Σ τ(x)(x')·cdf_{x'}(a-1)` elsewhere.
pub fn distribution_step(
    c: &PtsCoalgebra,
    horizon: u64,
) -> impl Fn(&ValueTable<Vec<Rational>>) -> ValueTable<Vec<Rational>> + '_ {
    move |cdfs| {
        (0..c.len())
            .map(|x| {
                (0..=horizon)
                    .map(|a| {
                        if c.is_accepting(x) {
                            Rational::one()
                        } else if a == 0 {
                            Rational::zero()
                        } else {
                            c.next(x)
                                .iter()
                                .map(|(y, p)| p * &cdfs[*y][a as usize - 1])
                                .sum()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

enum TailOutcome {
    Holds,
    Fails { at: u64, lhs: Rational, rhs: Rational },
    Undecided,
}

/// Checks the condition at non-accepting `x` for all `a > horizon`.
fn check_tail(c: &PtsCoalgebra, cert: &DistCert, x: usize) -> TailOutcome {
    let own = cert.value(x);
    let succ = c.next(x);
    if own.deferred.is_some() || succ.iter().any(|(y, _)| cert.value(*y).deferred.is_some()) {
        return TailOutcome::Undecided;
    }
    let from = succ
        .iter()
        .map(|(y, _)| cert.value(*y).closed_form_start() + 1)
        .chain([own.closed_form_start(), cert.horizon + 1])
        .max()
        .expect("nonempty");
    if from - cert.horizon > ANALYTIC_SCAN_LIMIT {
        return TailOutcome::Undecided;
    }
    let eval = |a: u64| {
        let lhs: Rational = succ
            .iter()
            .map(|(y, p)| p * cert.value(*y).cdf(a - 1).expect("no deferred mass"))
            .sum();
        let rhs = own.cdf(a).expect("no deferred mass");
        (lhs, rhs)
    };
    for a in cert.horizon + 1..from {
        let (lhs, rhs) = eval(a);
        if lhs < rhs {
            return TailOutcome::Fails { at: a, lhs, rhs };
        }
    }
    // lhs - rhs = Σ_j c_j·ρ_j^a for a ≥ from, with ρ = 1 for the constant
    let mut terms: BTreeMap<Rational, Rational> = BTreeMap::new();
    let mut add = |rho: Rational, coeff: Rational| {
        *terms.entry(rho).or_insert_with(Rational::zero) += coeff;
    };
    for (y, p) in succ {
        let (constant, decay) = cert.value(*y).closed_form();
        add(Rational::one(), p * constant);
        if let Some((k, r)) = decay {
            add(r.clone(), -(p * k / r));
        }
    }
    let (constant, decay) = own.closed_form();
    add(Rational::one(), -constant);
    if let Some((k, r)) = decay {
        add(r, k);
    }
    terms.retain(|_, coeff| !coeff.is_zero());
    match eventually_sign_from(&terms, from) {
        None => TailOutcome::Undecided,
        Some(settle) => {
            for a in from..=settle {
                let (lhs, rhs) = eval(a);
                if lhs < rhs {
                    return TailOutcome::Fails { at: a, lhs, rhs };
                }
            }
            TailOutcome::Holds
        }
    }
}

/// For `g(a) = Σ c_j·ρ_j^a` with distinct `ρ_j ∈ (0,1]` and nonzero `c_j`,
/// returns an index `N ≥ from` such that `g(a)` has the sign of the
/// dominant (largest-`ρ`) term for every `a ≥ N`. Checking `g` on
/// `from..=N` then decides `g ≥ 0` on all `a ≥ from`. `None` when no such
/// `N` lies within [`ANALYTIC_SCAN_LIMIT`].
fn eventually_sign_from(terms: &BTreeMap<Rational, Rational>, from: u64) -> Option<u64> {
    let Some((rho_dom, c_dom)) = terms.iter().next_back() else {
        return Some(from);
    };
    // g(a)/ρ_dom^a = c_dom + Σ_rest c_j·(ρ_j/ρ_dom)^a
    let rest: Vec<(Rational, Rational)> = terms
        .iter()
        .filter(|(rho, _)| *rho != rho_dom)
        .map(|(rho, c)| (rho / rho_dom, c.abs()))
        .collect();
    if rest.is_empty() {
        return Some(from);
    }
    let target = c_dom.abs();
    let mass: Rational = rest.iter().map(|(_, c)| c.clone()).sum();
    let top = rest.iter().map(|(r, _)| r.clone()).max().expect("nonempty");
    // smallest n with mass·top^n < target bounds the remainder for a ≥ n
    let dominated = |n: u64| &mass * pow(&top, n) < target;
    let limit = from + ANALYTIC_SCAN_LIMIT;
    if !dominated(limit) {
        return None;
    }
    let (mut lo, mut hi) = (from, limit);
    if dominated(lo) {
        return Some(from);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if dominated(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Exact check on `a = 0..=horizon`, then an analytic check of the tail
/// when every involved distribution is in closed form. Otherwise the
/// verdict is bounded by the horizon.
pub fn check_distribution_ranking(
    c: &PtsCoalgebra,
    cert: &DistCert,
) -> Result<CheckReport, PtsError> {
    if cert.values.len() != c.len() {
        return Err(PtsError::Coverage {
            expected: c.len(),
            found: cert.values.len(),
        });
    }
    let h = cert.horizon;
    let cdfs: ValueTable<Vec<Rational>> = cert.values.iter().map(|t| t.cdf_table(h)).collect();
    let image = distribution_step(c, h)(&cdfs);
    let mut violations = Vec::new();
    let mut undecided = false;
    let mut fixed_point = true;
    for x in 0..c.len() {
        if c.is_accepting(x) {
            fixed_point &= cert.values[x] == TailSpec::dirac(0);
            continue;
        }
        fixed_point &= cdfs[x] == image[x];
        let first_bad = (0..=h as usize).find(|&a| image[x][a] < cdfs[x][a]);
        if let Some(a) = first_bad {
            violations.push(
                Violation::new(c.name(x), fmt_rational(&image[x][a]), fmt_rational(&cdfs[x][a]))
                    .with_detail(format!("cdf condition fails at a = {a}")),
            );
            continue;
        }
        match check_tail(c, cert, x) {
            TailOutcome::Holds => {}
            TailOutcome::Undecided => undecided = true,
            TailOutcome::Fails { at, lhs, rhs } => violations.push(
                Violation::new(c.name(x), fmt_rational(&lhs), fmt_rational(&rhs))
                    .with_detail(format!("cdf condition fails at a = {at}")),
            ),
        }
    }
    let bound = cert
        .values
        .iter()
        .enumerate()
        .map(|(x, t)| (c.name(x).to_string(), ReportValue::Rational(t.finite_mass())))
        .collect();
    let mut report = CheckReport::new("drank", violations, bound, fixed_point)
        .with_parameter("horizon", h);
    if report.passed() && undecided {
        report.verdict = Verdict::VerifiedUpToHorizon { horizon: h };
    }
    Ok(report)
}

/// The optimal certificate up to `horizon`: the exact first-hitting-time
/// distribution. Atoms at `0..=horizon` come from the recurrence
/// `h_0 = [x accepting]`, `h_a(x) = Σ τ(x)(x')·h_{a-1}(x')` off accepting
/// states; the mass at `∞` is `1 - Reach(x)` and whatever finite mass
/// remains is deferred past the horizon.
pub fn synthesize_hitting_distribution(
    c: &PtsCoalgebra,
    horizon: u64,
) -> Result<DistCert, PtsError> {
    if horizon == 0 {
        return Err(PtsError::HorizonZero);
    }
    let n = c.len();
    let reach = pts_reach_exact(c);
    let mut atoms: Vec<BTreeMap<u64, Rational>> = vec![BTreeMap::new(); n];
    let mut h: Vec<Rational> = (0..n)
        .map(|x| if c.is_accepting(x) { Rational::one() } else { Rational::zero() })
        .collect();
    for a in 0..=horizon {
        if a > 0 {
            h = (0..n)
                .map(|x| {
                    if c.is_accepting(x) {
                        Rational::zero()
                    } else {
                        c.expect(x, &h)
                    }
                })
                .collect();
        }
        for (x, mass) in h.iter().enumerate() {
            if !mass.is_zero() {
                atoms[x].insert(a, mass.clone());
            }
        }
    }
    let values = atoms
        .into_iter()
        .enumerate()
        .map(|(x, atoms)| {
            let captured: Rational = atoms.values().sum();
            let residual = &reach[x] - captured;
            let deferred = residual.is_positive().then_some((horizon, residual));
            TailSpec::new(atoms, None, deferred, Rational::one() - &reach[x])
                .expect("hitting distribution is a distribution")
        })
        .collect();
    Ok(DistCert::new(horizon, values).expect("deferred mass starts at the horizon"))
}

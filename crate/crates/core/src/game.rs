//! Two-player reachability games.
//!
//! A game is given in one-step form: every state `x` carries a set of
//! options `Γ(x)` (the angelic player `max` picks one option `A ∈ Γ(x)`) and
//! every option is a set of successors (the demonic player `min` picks one
//! `x' ∈ A`). `max` wins a play when it reaches an accepting state or when
//! `min` is stuck on an empty option; `max` loses when stuck with `Γ(x) = ∅`.
//!
//! Semantics is the least fixed point of
//! `Φ(f)(x) = 1` if `x` is accepting, else `max_{A∈Γ(x)} min_{a∈A} f(a)`,
//! with `max ∅ = 0` and `min ∅ = 1`.
//!
//! Ranking functions take values in ordinals capped at `𝔷` (here `Fin(n)` or
//! `ω`) and satisfy, at every non-accepting `x`,
//! `min_{A∈Γ(x)} (sup_{a∈A} b(a)) +̂ 1 ≤ b(x)`, where `+̂` is successor
//! truncated at the cap, `sup ∅ = 0` and `min ∅ = 𝔷`. A value strictly below
//! the cap certifies that `max` wins from that state.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::error::ModelError;
use crate::fixpoint::{
    bottom_table, check_postfixed, kleene_lfp, BoolDomain, Domain, IterationConfig, ValueTable,
};
use crate::report::{CheckReport, ReportValue, Violation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameCoalgebra {
    names: Vec<String>,
    options: Vec<Vec<Vec<usize>>>,
    accepting: Vec<bool>,
}

impl GameCoalgebra {
    /// Builds a game from per-state options and accepting flags. Options and
    /// their members are deduplicated.
    pub fn new(
        names: Vec<String>,
        options: Vec<Vec<Vec<usize>>>,
        accepting: Vec<bool>,
    ) -> Result<Self, ModelError> {
        let n = names.len();
        if options.len() != n || accepting.len() != n {
            return Err(ModelError::Coverage {
                expected: n,
                found: options.len().min(accepting.len()),
            });
        }
        check_unique(&names)?;
        let mut normalized = Vec::with_capacity(n);
        for opts in options {
            let mut opts: Vec<Vec<usize>> = opts
                .into_iter()
                .map(|mut set| {
                    set.sort_unstable();
                    set.dedup();
                    set
                })
                .collect();
            if let Some(&index) = opts.iter().flatten().find(|&&i| i >= n) {
                return Err(ModelError::StateOutOfRange { index, len: n });
            }
            opts.sort();
            opts.dedup();
            normalized.push(opts);
        }
        Ok(GameCoalgebra {
            names,
            options: normalized,
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

    pub fn options(&self, state: usize) -> &[Vec<usize>] {
        &self.options[state]
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn names_of<'a>(&'a self, states: impl IntoIterator<Item = &'a usize>) -> Vec<&'a str> {
        states.into_iter().map(|&s| self.name(s)).collect()
    }
}

pub(crate) fn check_unique(names: &[String]) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(ModelError::DuplicateState(name.clone()));
        }
    }
    Ok(())
}

/// Name-based construction, mostly for fixtures and tests.
#[derive(Debug, Default)]
pub struct GameBuilder {
    names: Vec<String>,
    accepting: Vec<bool>,
    options: Vec<(String, Vec<Vec<String>>)>,
}

impl GameBuilder {
    pub fn state(mut self, name: &str, accepting: bool) -> Self {
        self.names.push(name.to_string());
        self.accepting.push(accepting);
        self
    }

    pub fn option(mut self, state: &str, members: &[&str]) -> Self {
        let members = members.iter().map(|s| s.to_string()).collect();
        match self.options.iter_mut().find(|(s, _)| s == state) {
            Some((_, opts)) => opts.push(members),
            None => self.options.push((state.to_string(), vec![members])),
        }
        self
    }

    pub fn build(self) -> Result<GameCoalgebra, ModelError> {
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
        let mut options = vec![Vec::new(); self.names.len()];
        for (state, opts) in &self.options {
            let s = lookup(state)?;
            for members in opts {
                let set = members.iter().map(|m| lookup(m)).collect::<Result<_, _>>()?;
                options[s].push(set);
            }
        }
        GameCoalgebra::new(self.names.clone(), options, self.accepting.clone())
    }
}

/// An ordinal up to `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrdinalValue {
    Fin(u64),
    Omega,
}

impl OrdinalValue {
    /// `min(self + 1, cap)`.
    pub fn succ_capped(self, cap: OrdinalValue) -> OrdinalValue {
        let next = match self {
            OrdinalValue::Fin(n) => OrdinalValue::Fin(n + 1),
            OrdinalValue::Omega => OrdinalValue::Omega,
        };
        next.min(cap)
    }
}

impl fmt::Display for OrdinalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalValue::Fin(n) => write!(f, "{n}"),
            OrdinalValue::Omega => f.write_str("omega"),
        }
    }
}

/// `Ord_{≤cap}` ordered by `⊑`, which is reversed numeric order: the cap is
/// bottom and `0` is top.
#[derive(Clone, Copy, Debug)]
pub struct RankDomain {
    pub cap: OrdinalValue,
}

impl Domain for RankDomain {
    type Value = OrdinalValue;

    fn leq(&self, a: &OrdinalValue, b: &OrdinalValue) -> bool {
        a >= b
    }

    fn bottom(&self) -> OrdinalValue {
        self.cap
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    cap: OrdinalValue,
    values: Vec<OrdinalValue>,
}

impl RankCertificate {
    pub fn new(cap: OrdinalValue, values: Vec<OrdinalValue>) -> Result<Self, ModelError> {
        if let Some(v) = values.iter().find(|v| **v > cap) {
            return Err(ModelError::InvalidCertificate(format!(
                "rank {v} exceeds cap {cap}"
            )));
        }
        Ok(RankCertificate { cap, values })
    }

    pub fn cap(&self) -> OrdinalValue {
        self.cap
    }

    pub fn values(&self) -> &[OrdinalValue] {
        &self.values
    }

    pub fn value(&self, state: usize) -> OrdinalValue {
        self.values[state]
    }

    /// `q∘b`: true where the rank is strictly below the cap.
    pub fn certified(&self) -> Vec<bool> {
        self.values.iter().map(|v| *v < self.cap).collect()
    }
}

/// A positional strategy for `max`: the index of the chosen option per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    choice: Vec<Option<usize>>,
}

impl Strategy {
    pub fn choice(&self, state: usize) -> Option<usize> {
        self.choice[state]
    }

    pub fn choices(&self) -> &[Option<usize>] {
        &self.choice
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("certificate covers {found} states, game has {expected}")]
    Coverage { expected: usize, found: usize },
    #[error("certificate is not a ranking function ({violations} violations)")]
    CertificateInvalid { violations: usize },
}

/// `Φ_{c,σ_g}` over boolean tables.
pub fn reach_step(c: &GameCoalgebra) -> impl Fn(&ValueTable<bool>) -> ValueTable<bool> + '_ {
    move |f| {
        (0..c.len())
            .map(|x| {
                c.is_accepting(x)
                    || c.options(x).iter().any(|opt| opt.iter().all(|&a| f[a]))
            })
            .collect()
    }
}

/// States from which `max` can force reaching an accepting state.
pub fn game_lfp_reach(c: &GameCoalgebra) -> BTreeSet<usize> {
    let cfg = IterationConfig::new(c.len() + 2).expect("positive budget");
    let res = kleene_lfp(&BoolDomain, reach_step(c), bottom_table(&BoolDomain, c.len()), cfg)
        .expect("reach step is monotone");
    assert!(res.stabilized, "finite game must stabilize within |X|+1 rounds");
    res.table
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| i)
        .collect()
}

/// One-step rank bound `min_{A∈Γ} (sup_{a∈A} b(a)) +̂ 1`, or 0 when accepting.
fn rank_bound(c: &GameCoalgebra, x: usize, b: &[OrdinalValue], cap: OrdinalValue) -> OrdinalValue {
    if c.is_accepting(x) {
        return OrdinalValue::Fin(0);
    }
    c.options(x)
        .iter()
        .map(|opt| option_rank(opt, b, cap))
        .min()
        .unwrap_or(cap)
}

fn option_rank(option: &[usize], b: &[OrdinalValue], cap: OrdinalValue) -> OrdinalValue {
    let sup = option
        .iter()
        .map(|&a| b[a])
        .max()
        .unwrap_or(OrdinalValue::Fin(0));
    sup.succ_capped(cap)
}

/// `Φ_{c,r_{g,cap}}` over ordinal tables.
pub fn rank_step(
    c: &GameCoalgebra,
    cap: OrdinalValue,
) -> impl Fn(&ValueTable<OrdinalValue>) -> ValueTable<OrdinalValue> + '_ {
    move |b| {
        (0..c.len())
            .map(|x| rank_bound(c, x, b.as_slice(), cap))
            .collect()
    }
}

pub fn check_game_ranking(
    c: &GameCoalgebra,
    cert: &RankCertificate,
) -> Result<CheckReport, GameError> {
    if cert.values.len() != c.len() {
        return Err(GameError::Coverage {
            expected: c.len(),
            found: cert.values.len(),
        });
    }
    let domain = RankDomain { cap: cert.cap };
    let table = ValueTable::new(cert.values.clone());
    let step = rank_step(c, cert.cap);
    let violations = check_postfixed(&domain, &step, &table)
        .into_iter()
        .map(|v| {
            Violation::new(c.name(v.state), v.step_value, v.candidate)
                .with_detail("rank is below the one-step bound")
        })
        .collect();
    let fixed_point = step(&table) == table;
    let bound = cert
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (c.name(i).to_string(), ReportValue::indicator(*v < cert.cap)))
        .collect();
    Ok(CheckReport::new("rank", violations, bound, fixed_point).with_parameter("cap", cert.cap))
}

/// The optimal ranking function: the unique fixed point of `Φ_{c,r_{g,cap}}`.
///
/// Computed by backward attractor layering. Layer 0 holds the accepting
/// states and states with an empty option; a state joins layer `k+1` once
/// one of its options lies entirely within layers `≤ k`. Ranks are layer
/// indices truncated at the cap; states never attracted get the cap.
pub fn synthesize_game_rank(c: &GameCoalgebra, cap: OrdinalValue) -> RankCertificate {
    let n = c.len();
    let mut level: Vec<Option<u64>> = vec![None; n];
    // option ids per state, and reverse index member -> (state, option id)
    let mut pending: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut watchers: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();
    for x in 0..n {
        let mut counts = Vec::with_capacity(c.options(x).len());
        for (k, opt) in c.options(x).iter().enumerate() {
            counts.push(opt.len());
            for &a in opt {
                watchers[a].push((x, k));
            }
        }
        let immediate = c.is_accepting(x) || counts.contains(&0);
        if immediate {
            level[x] = Some(if c.is_accepting(x) { 0 } else { 1 });
        }
        pending.push(counts);
    }
    // Accepting states are layer 0; states with an empty option are one step
    // away (the move into the stuck option). Process in nondecreasing level.
    let mut initial: Vec<usize> = (0..n).filter(|&x| level[x].is_some()).collect();
    initial.sort_by_key(|&x| level[x]);
    queue.extend(initial);
    while let Some(a) = queue.pop_front() {
        let la = level[a].expect("queued states are levelled");
        for &(x, k) in &watchers[a] {
            if level[x].is_some() {
                continue;
            }
            pending[x][k] -= 1;
            if pending[x][k] == 0 {
                level[x] = Some(la + 1);
                queue.push_back(x);
            }
        }
    }
    let values = level
        .into_iter()
        .map(|l| match l {
            Some(k) => OrdinalValue::Fin(k).min(cap),
            None => cap,
        })
        .collect();
    RankCertificate { cap, values }
}

/// Positional strategy read off a ranking function: at every non-accepting
/// state ranked below the cap, pick an option minimizing
/// `(sup_{a∈A} b(a)) +̂ 1` (first such option on ties).
pub fn extract_strategy(
    c: &GameCoalgebra,
    cert: &RankCertificate,
) -> Result<Strategy, GameError> {
    let report = check_game_ranking(c, cert)?;
    if !report.passed() {
        return Err(GameError::CertificateInvalid {
            violations: report.violations.len(),
        });
    }
    let choice = (0..c.len())
        .map(|x| {
            if c.is_accepting(x) || cert.value(x) >= cert.cap {
                return None;
            }
            c.options(x)
                .iter()
                .enumerate()
                .min_by_key(|(_, opt)| option_rank(opt, &cert.values, cert.cap))
                .map(|(k, _)| k)
        })
        .collect();
    Ok(Strategy { choice })
}

/// Finite truncation of the chain `x_0, …, x_n` where `x_0` is accepting and
/// stuck, and `x_a` offers the single option `{x_b | b < a}`.
///
/// Every state is winning, yet the optimal rank of `x_n` is exactly `n`, so a
/// cap of `Fin(n)` fails to certify `x_n`.
pub fn incompleteness_chain(n: usize) -> GameCoalgebra {
    assert!(n >= 1, "chain needs at least two states");
    let names = (0..=n).map(|i| format!("x{i}")).collect();
    let options = (0..=n)
        .map(|a| if a == 0 { vec![] } else { vec![(0..a).collect()] })
        .collect();
    let accepting = (0..=n).map(|a| a == 0).collect();
    GameCoalgebra::new(names, options, accepting).expect("chain is well formed")
}

/// Explicit bipartite game structure `(X_max, X_min, τ)` with accepting
/// `max` states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameStructure {
    pub max_names: Vec<String>,
    pub min_names: Vec<String>,
    /// `max` state → `min` successors.
    pub max_moves: Vec<Vec<usize>>,
    /// `min` state → `max` successors.
    pub min_moves: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
}

impl GameStructure {
    /// One `min` state per distinct option set. `min` states are named by
    /// their members, e.g. `{x1 x2}`.
    pub fn from_coalgebra(c: &GameCoalgebra) -> GameStructure {
        let mut min_index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut min_moves = Vec::new();
        let mut max_moves = Vec::with_capacity(c.len());
        for x in 0..c.len() {
            let mut targets = Vec::new();
            for opt in c.options(x) {
                let id = *min_index.entry(opt.clone()).or_insert_with(|| {
                    min_moves.push(opt.clone());
                    min_moves.len() - 1
                });
                targets.push(id);
            }
            max_moves.push(targets);
        }
        let min_names = min_moves
            .iter()
            .map(|set: &Vec<usize>| {
                let members: Vec<&str> = set.iter().map(|&a| c.name(a)).collect();
                format!("{{{}}}", members.join(" "))
            })
            .collect();
        GameStructure {
            max_names: c.names.clone(),
            min_names,
            max_moves,
            min_moves,
            accepting: c.accepting.clone(),
        }
    }

    /// Collapses each `min` state to its successor set. Distinct `min` states
    /// with the same successors become one option.
    pub fn to_coalgebra(&self) -> Result<GameCoalgebra, ModelError> {
        let options = self
            .max_moves
            .iter()
            .map(|ys| ys.iter().map(|&y| self.min_moves[y].clone()).collect())
            .collect();
        GameCoalgebra::new(self.max_names.clone(), options, self.accepting.clone())
    }
}

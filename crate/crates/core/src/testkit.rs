//! Random instances and solver-independent oracles for the test suites.
//!
//! Nothing here calls into the fixpoint engine or the linear solver: plays
//! are enumerated directly, paths are walked directly, and probabilities are
//! sampled.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{GameCoalgebra, Strategy};
use crate::pts::PtsCoalgebra;
use crate::tree::TreeAutomaton;
use crate::value::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Game,
    Pts,
    Tree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomInstanceSpec {
    pub kind: InstanceKind,
    pub min_states: usize,
    pub max_states: usize,
    pub min_branching: usize,
    pub max_branching: usize,
    pub accept_density: f64,
    pub seed: u64,
}

impl RandomInstanceSpec {
    pub fn new(kind: InstanceKind, seed: u64) -> Self {
        RandomInstanceSpec {
            kind,
            min_states: 2,
            max_states: 6,
            min_branching: 1,
            max_branching: 3,
            accept_density: 0.25,
            seed,
        }
    }

    pub fn states(mut self, min: usize, max: usize) -> Self {
        self.min_states = min;
        self.max_states = max;
        self
    }

    pub fn branching(mut self, min: usize, max: usize) -> Self {
        self.min_branching = min;
        self.max_branching = max;
        self
    }

    pub fn accept_density(mut self, p: f64) -> Self {
        self.accept_density = p;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.min_states == 0 || self.min_states > self.max_states {
            return Err(format!("bad state bounds {}..={}", self.min_states, self.max_states));
        }
        if self.min_branching == 0 || self.min_branching > self.max_branching {
            return Err(format!(
                "bad branching bounds {}..={}",
                self.min_branching, self.max_branching
            ));
        }
        if !(0.0..=1.0).contains(&self.accept_density) {
            return Err(format!("accept density {} outside [0,1]", self.accept_density));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        self.validate().expect("valid instance spec");
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn size(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(self.min_states..=self.max_states)
    }

    fn accepting(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
        (0..n).map(|_| rng.gen_bool(self.accept_density)).collect()
    }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// A game whose options each hold between zero and `max_branching` members.
/// States have between zero and `max_branching` options.
pub fn random_game(spec: &RandomInstanceSpec) -> GameCoalgebra {
    let mut rng = spec.rng();
    let n = spec.size(&mut rng);
    let accepting = spec.accepting(&mut rng, n);
    let options = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=spec.max_branching);
            (0..k)
                .map(|_| {
                    // Empty options are rare so that most games are not trivially won.
                    let m = if rng.gen_bool(0.1) {
                        0
                    } else {
                        rng.gen_range(spec.min_branching..=spec.max_branching)
                    };
                    (0..m).map(|_| rng.gen_range(0..n)).collect()
                })
                .collect()
        })
        .collect();
    GameCoalgebra::new(names(n), options, accepting).expect("generated game is well formed")
}

fn random_distribution(rng: &mut ChaCha8Rng, succ: Vec<usize>) -> Vec<(usize, Rational)> {
    let mut weights: BTreeMap<usize, i64> = BTreeMap::new();
    for y in succ {
        *weights.entry(y).or_default() += rng.gen_range(1..=4);
    }
    let total: i64 = weights.values().sum();
    weights
        .into_iter()
        .map(|(y, w)| (y, Rational::new(BigInt::from(w), BigInt::from(total))))
        .collect()
}

pub fn random_pts(spec: &RandomInstanceSpec) -> PtsCoalgebra {
    let mut rng = spec.rng();
    let n = spec.size(&mut rng);
    let accepting = spec.accepting(&mut rng, n);
    let next = (0..n)
        .map(|_| {
            let k = rng.gen_range(spec.min_branching..=spec.max_branching);
            let succ = (0..k).map(|_| rng.gen_range(0..n)).collect();
            random_distribution(&mut rng, succ)
        })
        .collect();
    PtsCoalgebra::new(names(n), next, accepting).expect("generated PTS is well formed")
}

/// A PTS reaching the accepting set almost surely from every state: the last
/// state is accepting and every other state has an edge to a later one.
pub fn random_pts_almost_sure(spec: &RandomInstanceSpec) -> PtsCoalgebra {
    let mut rng = spec.rng();
    let n = spec.size(&mut rng).max(2);
    let mut accepting = spec.accepting(&mut rng, n);
    accepting[n - 1] = true;
    let next = (0..n)
        .map(|x| {
            let k = rng.gen_range(spec.min_branching..=spec.max_branching);
            let mut succ: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            if x + 1 < n {
                succ.push(rng.gen_range(x + 1..n));
            }
            random_distribution(&mut rng, succ)
        })
        .collect();
    PtsCoalgebra::new(names(n), next, accepting).expect("generated PTS is well formed")
}

/// A tree automaton over symbols `f0 … f{max_branching}` where `fk` has
/// arity `k`.
pub fn random_tree(spec: &RandomInstanceSpec) -> TreeAutomaton {
    let mut rng = spec.rng();
    let n = spec.size(&mut rng);
    let accepting = spec.accepting(&mut rng, n);
    let symbols = (0..=spec.max_branching).map(|k| (format!("f{k}"), k)).collect();
    let trans = (0..n)
        .map(|_| {
            let k = if rng.gen_bool(0.15) {
                0
            } else {
                rng.gen_range(spec.min_branching..=spec.max_branching)
            };
            (k, (0..k).map(|_| rng.gen_range(0..n)).collect())
        })
        .collect();
    TreeAutomaton::new(symbols, names(n), trans, accepting).expect("generated automaton is well formed")
}

/// Whether `max` can force a visit to an accepting state within `depth` moves
/// from `x`, by exhaustive search over both players' choices. Picking an empty
/// option leaves `min` without a move, which counts as a win.
fn max_wins(c: &GameCoalgebra, x: usize, depth: usize) -> bool {
    if c.is_accepting(x) {
        return true;
    }
    depth > 0
        && c
            .options(x)
            .iter()
            .any(|opt| opt.iter().all(|&y| max_wins(c, y, depth - 1)))
}

/// States winning for `max` over plays of at most `depth` rounds. With
/// `depth ≥ |X|` this is the full winning region.
pub fn brute_force_game_reach(c: &GameCoalgebra, depth: usize) -> std::collections::BTreeSet<usize> {
    (0..c.len()).filter(|&x| max_wins(c, x, depth)).collect()
}

/// Whether following `strategy` from `x` reaches an accepting state within
/// `depth` rounds against every choice of `min`.
pub fn strategy_wins_within(c: &GameCoalgebra, strategy: &Strategy, x: usize, depth: usize) -> bool {
    if c.is_accepting(x) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    match strategy.choice(x) {
        Some(k) => c.options(x)[k]
            .iter()
            .all(|&y| strategy_wins_within(c, strategy, y, depth - 1)),
        None => false,
    }
}

/// Per-state flag: some path of `depth` edges visits only non-accepting
/// states. With `depth ≥ |X|+1` such a path repeats a state, so the flag
/// holds exactly at states with an infinite non-accepting branch.
pub fn enumerate_tree_paths(a: &TreeAutomaton, depth: usize) -> Vec<bool> {
    fn walk(a: &TreeAutomaton, x: usize, depth: usize) -> bool {
        !a.is_accepting(x) && (depth == 0 || a.children(x).iter().any(|&y| walk(a, y, depth - 1)))
    }
    (0..a.len()).map(|x| walk(a, x, depth)).collect()
}

fn cumulative(c: &PtsCoalgebra) -> Vec<Vec<(usize, f64)>> {
    (0..c.len())
        .map(|x| {
            let mut acc = 0.0;
            c.next(x)
                .iter()
                .map(|(y, p)| {
                    acc += p.to_f64().expect("probabilities are finite");
                    (*y, acc)
                })
                .collect()
        })
        .collect()
}

/// States from which no accepting state is reachable; runs entering one stop.
fn traps(c: &PtsCoalgebra) -> Vec<bool> {
    let mut alive: Vec<bool> = (0..c.len()).map(|x| c.is_accepting(x)).collect();
    loop {
        let mut changed = false;
        for x in 0..c.len() {
            if !alive[x] && c.next(x).iter().any(|(y, _)| alive[*y]) {
                alive[x] = true;
                changed = true;
            }
        }
        if !changed {
            return alive.into_iter().map(|a| !a).collect();
        }
    }
}

const BATCH: usize = 4096;

/// Fraction of `trials` runs from `x` that hit an accepting state within
/// `max_steps` steps, with its standard error `√(p(1−p)/trials)`. Runs are
/// split into batches with seeds derived from `seed`, so the result depends
/// only on the arguments.
pub fn monte_carlo_reach(
    c: &PtsCoalgebra,
    x: usize,
    trials: usize,
    max_steps: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(trials >= 1, "at least one trial");
    let cdf = cumulative(c);
    let trap = traps(c);
    let batches = trials.div_ceil(BATCH);
    let hits: usize = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let runs = BATCH.min(trials - b * BATCH);
            (0..runs)
                .filter(|_| {
                    let mut s = x;
                    for _ in 0..max_steps {
                        if c.is_accepting(s) {
                            return true;
                        }
                        if trap[s] {
                            return false;
                        }
                        let u: f64 = rng.gen();
                        let row = &cdf[s];
                        s = row
                            .iter()
                            .find(|(_, acc)| u < *acc)
                            .unwrap_or(&row[row.len() - 1])
                            .0;
                    }
                    c.is_accepting(s)
                })
                .count()
        })
        .sum();
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

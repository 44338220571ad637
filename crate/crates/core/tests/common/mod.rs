#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use corank::fixpoint::ValueTable;
use corank::game::{rank_step, GameCoalgebra, OrdinalValue, RankCertificate};
use corank::io::{parse_certificate, parse_model, CertificateDocument, ModelDocument};
use corank::pts::{
    pts_reach_iter, AdditiveCert, DistCert, Geometric, MultiplicativeCert, NonCountingCert,
    PtsCoalgebra, TailSpec,
};
use corank::tree::{TreeArena, TreeAutomaton, TreeCert, TreeOrBottom};
use corank::{Extended, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn model(name: &str) -> ModelDocument {
    parse_model(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn cert(name: &str) -> CertificateDocument {
    parse_certificate(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn game(name: &str) -> GameCoalgebra {
    match model(name) {
        ModelDocument::Game(c) => c,
        other => panic!("{name} is a {} model", other.kind().as_str()),
    }
}

pub fn pts(name: &str) -> PtsCoalgebra {
    match model(name) {
        ModelDocument::Pts(c) => c,
        other => panic!("{name} is a {} model", other.kind().as_str()),
    }
}

pub fn tree(name: &str) -> TreeAutomaton {
    match model(name) {
        ModelDocument::Tree(a) => a,
        other => panic!("{name} is a {} model", other.kind().as_str()),
    }
}

/// Plain Gauss-Jordan with full row scan, kept separate from the crate's
/// solver so that the oracles below share no code with it.
fn gauss(mut m: Vec<Vec<Rational>>) -> Vec<Rational> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("nonsingular system");
        m.swap(col, piv);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (v, w) in m[r].iter_mut().zip(pivot_row) {
                    *v = &*v - &f * w;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n].clone()).collect()
}

/// States with a positive-probability path to an accepting state, by DFS on
/// reversed edges.
pub fn can_reach(c: &PtsCoalgebra) -> Vec<bool> {
    let n = c.len();
    let mut preds = vec![Vec::new(); n];
    for x in 0..n {
        for (y, _) in c.next(x) {
            preds[*y].push(x);
        }
    }
    let mut seen: Vec<bool> = (0..n).map(|x| c.is_accepting(x)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&x| seen[x]).collect();
    while let Some(y) = stack.pop() {
        for &x in &preds[y] {
            if !seen[x] {
                seen[x] = true;
                stack.push(x);
            }
        }
    }
    seen
}

/// Reachability probabilities: zero off `can_reach`, one on accepting
/// states, and the absorbing-chain equations elsewhere.
pub fn exact_reach(c: &PtsCoalgebra) -> Vec<Rational> {
    let live = can_reach(c);
    let unknown: Vec<usize> = (0..c.len()).filter(|&x| live[x] && !c.is_accepting(x)).collect();
    let pos: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let k = unknown.len();
    let rows = unknown
        .iter()
        .map(|&x| {
            let mut row = vec![Rational::zero(); k + 1];
            row[pos[&x]] = Rational::one();
            for (y, p) in c.next(x) {
                if c.is_accepting(*y) {
                    row[k] += p;
                } else if let Some(&j) = pos.get(y) {
                    row[j] -= p;
                }
            }
            row
        })
        .collect();
    let sol = gauss(rows);
    (0..c.len())
        .map(|x| {
            if c.is_accepting(x) {
                Rational::one()
            } else {
                pos.get(&x).map(|&i| sol[i].clone()).unwrap_or_else(Rational::zero)
            }
        })
        .collect()
}

/// Expected steps to the accepting set; infinite where it is not reached
/// almost surely.
pub fn exact_hitting_time(c: &PtsCoalgebra) -> Vec<Extended> {
    let reach = exact_reach(c);
    let finite: Vec<bool> = reach.iter().map(|r| r.is_one()).collect();
    let unknown: Vec<usize> = (0..c.len()).filter(|&x| finite[x] && !c.is_accepting(x)).collect();
    let pos: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let k = unknown.len();
    let rows = unknown
        .iter()
        .map(|&x| {
            let mut row = vec![Rational::zero(); k + 1];
            row[pos[&x]] = Rational::one();
            row[k] = Rational::one();
            for (y, p) in c.next(x) {
                if let Some(&j) = pos.get(y) {
                    row[j] -= p;
                }
            }
            row
        })
        .collect();
    let sol = gauss(rows);
    (0..c.len())
        .map(|x| {
            if c.is_accepting(x) {
                Extended::Finite(Rational::zero())
            } else if let Some(&i) = pos.get(&x) {
                Extended::Finite(sol[i].clone())
            } else {
                Extended::Infinity
            }
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_ordinal(rng: &mut ChaCha8Rng, cap: OrdinalValue, n: usize) -> OrdinalValue {
    let hi = match cap {
        OrdinalValue::Fin(k) => k,
        OrdinalValue::Omega => n as u64 + 1,
    };
    match rng.gen_range(0..=hi + 1) {
        v if v > hi => cap,
        v => OrdinalValue::Fin(v),
    }
}

/// Candidate rank certificates: uniformly random tables and Kleene iterates
/// of the rank step from the all-cap table.
pub fn game_candidates(c: &GameCoalgebra, rng: &mut ChaCha8Rng) -> Vec<RankCertificate> {
    let mut out = Vec::new();
    for cap in [OrdinalValue::Omega, OrdinalValue::Fin(c.len() as u64 / 2)] {
        for _ in 0..3 {
            let values = (0..c.len()).map(|_| random_ordinal(rng, cap, c.len())).collect();
            out.push(RankCertificate::new(cap, values).unwrap());
        }
        let step = rank_step(c, cap);
        let mut t = ValueTable::constant(c.len(), cap);
        for _ in 0..rng.gen_range(0..=c.len()) {
            t = step(&t);
        }
        out.push(RankCertificate::new(cap, t.into_vec()).unwrap());
    }
    out
}

fn random_rational(rng: &mut ChaCha8Rng, max_num: i64, den: i64) -> Rational {
    rat(rng.gen_range(0..=max_num), den)
}

/// Candidate additive certificates: scaled hitting times (which always pass)
/// and random tables.
pub fn additive_candidates(c: &PtsCoalgebra, rng: &mut ChaCha8Rng) -> Vec<AdditiveCert> {
    let eps = rat(rng.gen_range(1..=4), rng.gen_range(1..=3));
    let e = exact_hitting_time(c);
    let mut out = Vec::new();
    for _ in 0..2 {
        let scale = Rational::one() + random_rational(rng, 4, 2);
        let values = e.iter().map(|v| v.scale(&(&eps * &scale))).collect();
        out.push(AdditiveCert::new(eps.clone(), values).unwrap());
    }
    for _ in 0..3 {
        let values = (0..c.len())
            .map(|_| {
                if rng.gen_bool(0.3) {
                    Extended::Infinity
                } else {
                    Extended::Finite(random_rational(rng, 12, 2))
                }
            })
            .collect();
        out.push(AdditiveCert::new(eps.clone(), values).unwrap());
    }
    out
}

/// Candidate non-counting certificates: scaled discounted values computed by
/// truncated iteration from zero, and random tables.
pub fn noncounting_candidates(c: &PtsCoalgebra, rng: &mut ChaCha8Rng) -> Vec<NonCountingCert> {
    let gamma = rat(rng.gen_range(1..10), 10);
    let mut out = Vec::new();
    let mut v = vec![Rational::zero(); c.len()];
    for _ in 0..rng.gen_range(0..8) {
        v = (0..c.len())
            .map(|x| {
                if c.is_accepting(x) {
                    Rational::one()
                } else {
                    c.next(x).iter().map(|(y, p)| &gamma * p * &v[*y]).sum()
                }
            })
            .collect();
    }
    let lambda = random_rational(rng, 4, 4);
    out.push(NonCountingCert::new(gamma.clone(), v.iter().map(|q| q * &lambda).collect()).unwrap());
    out.push(NonCountingCert::new(gamma.clone(), v).unwrap());
    for _ in 0..3 {
        let values = (0..c.len()).map(|_| random_rational(rng, 8, 8)).collect();
        out.push(NonCountingCert::new(gamma.clone(), values).unwrap());
    }
    out
}

/// First-hitting-time distribution cut at `n` steps, remaining mass at `∞`.
pub fn truncated_hitting(c: &PtsCoalgebra, n: u64) -> Vec<TailSpec> {
    let mut prev = vec![Rational::zero(); c.len()];
    let mut atoms = vec![BTreeMap::new(); c.len()];
    for a in 0..=n {
        let cur = pts_reach_iter(c, a as usize + 1);
        for x in 0..c.len() {
            let m = &cur[x] - &prev[x];
            if m.is_positive() {
                atoms[x].insert(a, m);
            }
        }
        prev = cur;
    }
    atoms
        .into_iter()
        .enumerate()
        .map(|(x, atoms)| TailSpec::new(atoms, None, None, Rational::one() - &prev[x]).unwrap())
        .collect()
}

/// Candidate distribution certificates: truncated hitting distributions,
/// random Dirac tables and random geometric tails.
pub fn distribution_candidates(c: &PtsCoalgebra, rng: &mut ChaCha8Rng) -> Vec<DistCert> {
    let horizon = rng.gen_range(1..=8);
    let mut out = vec![DistCert::new(horizon, truncated_hitting(c, rng.gen_range(0..6))).unwrap()];
    let dirac: Vec<TailSpec> = (0..c.len())
        .map(|_| match rng.gen_range(0..5) {
            0 => TailSpec::at_infinity(),
            k => TailSpec::dirac(k - 1),
        })
        .collect();
    out.push(DistCert::new(horizon, dirac).unwrap());
    let geo: Vec<TailSpec> = (0..c.len())
        .map(|x| {
            if c.is_accepting(x) {
                return TailSpec::dirac(0);
            }
            let r = rat(rng.gen_range(1..=3), 4);
            let total = random_rational(rng, 4, 4);
            // coefficient chosen so the geometric part carries `total`
            let coeff = &total * (Rational::one() - &r);
            let g = Geometric {
                start: rng.gen_range(1..4),
                coeff,
                ratio: r,
            };
            TailSpec::new(BTreeMap::new(), Some(g), None, Rational::one() - &total)
                .unwrap_or_else(|_| TailSpec::at_infinity())
        })
        .collect();
    if let Ok(cert) = DistCert::new(horizon, geo) {
        out.push(cert);
    }
    out
}

fn random_tree_value(arena: &mut TreeArena, rng: &mut ChaCha8Rng, depth: usize) -> TreeOrBottom {
    fn node(arena: &mut TreeArena, rng: &mut ChaCha8Rng, depth: usize) -> corank::tree::NodeId {
        if depth == 0 || rng.gen_bool(0.3) {
            return arena.leaf();
        }
        let kids = (0..rng.gen_range(0..=3)).map(|_| node(arena, rng, depth - 1)).collect();
        arena.node(kids)
    }
    if rng.gen_bool(0.3) {
        TreeOrBottom::Bottom
    } else {
        TreeOrBottom::Tree(node(arena, rng, depth))
    }
}

/// Candidate tree certificates: the synthesized one with random entries
/// dropped to bottom, and random tables.
pub fn tree_candidates(a: &TreeAutomaton, rng: &mut ChaCha8Rng) -> Vec<TreeCert> {
    let mut out = Vec::new();
    let mut synth = corank::tree::synthesize_tree_rank(a);
    out.push(synth.clone());
    for v in synth.values.iter_mut() {
        if rng.gen_bool(0.3) {
            *v = TreeOrBottom::Bottom;
        }
    }
    out.push(synth);
    for _ in 0..3 {
        let mut arena = TreeArena::new();
        let values = (0..a.len()).map(|_| random_tree_value(&mut arena, rng, 3)).collect();
        out.push(TreeCert { arena, values });
    }
    out
}

/// A multiplicative certificate with values `αδ` on accepting states and the
/// solution of `b = (1/α)·Σ τ·b` elsewhere, for the first `α` in
/// `1/2, 3/4, 7/8, …` where that solution passes the check.
pub fn multiplicative_for(c: &PtsCoalgebra, delta: &Rational) -> Option<MultiplicativeCert> {
    let unknown: Vec<usize> = (0..c.len()).filter(|&x| !c.is_accepting(x)).collect();
    let pos: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let k = unknown.len();
    for m in 1..16 {
        let alpha = Rational::one() - rat(1, 1 << m);
        let rows: Vec<Vec<Rational>> = unknown
            .iter()
            .map(|&x| {
                let mut row = vec![Rational::zero(); k + 1];
                row[pos[&x]] = alpha.clone();
                for (y, p) in c.next(x) {
                    match pos.get(y) {
                        Some(&j) => row[j] -= p,
                        None => row[k] += p * &alpha * delta,
                    }
                }
                row
            })
            .collect();
        let sol = gauss_checked(rows)?;
        let values: Vec<Extended> = (0..c.len())
            .map(|x| match pos.get(&x) {
                Some(&i) => Extended::Finite(sol[i].clone()),
                None => Extended::Finite(&alpha * delta),
            })
            .collect();
        if values.iter().any(|v| !v.is_nonnegative()) {
            continue;
        }
        let cert = MultiplicativeCert::new(alpha, delta.clone(), values).ok()?;
        if corank::pts::check_multiplicative(c, &cert).ok()?.passed() {
            return Some(cert);
        }
    }
    None
}

fn gauss_checked(m: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = m.len();
    let singular = {
        let mut probe = m.clone();
        (0..n).any(|col| {
            let piv = (col..n).find(|&r| !probe[r][col].is_zero());
            match piv {
                None => true,
                Some(p) => {
                    probe.swap(col, p);
                    let pivot_row = probe[col].clone();
                    for r in col + 1..n {
                        let f = &probe[r][col] / &pivot_row[col];
                        for (v, w) in probe[r].iter_mut().zip(&pivot_row) {
                            *v = &*v - &f * w;
                        }
                    }
                    false
                }
            }
        })
    };
    (!singular).then(|| gauss(m))
}

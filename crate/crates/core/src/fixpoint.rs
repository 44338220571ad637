//! Monotone iteration over finite value tables.
//!
//! Every system kind in this crate reduces its semantics and its certificate
//! conditions to a step map `Φ : (X → V) → (X → V)` over a finite state space.
//! This module provides the three operations shared by all of them:
//!
//! * [`kleene_lfp`] iterates `Φ` from the bottom table until it stabilizes,
//!   yielding the least fixed point;
//! * [`iterate_from_postfix`] iterates `Φ` from a post-fixed point `l ⊑ Φ(l)`,
//!   yielding a fixed point above `l`;
//! * [`check_postfixed`] tests the local condition `b ⊑ Φ(b)` that makes `b` a
//!   ranking certificate.
//!
//! Iteration stops at the first `i` with `Φ^{i+1}(⊥) = Φ^i(⊥)`. Only finite
//! stages are computed; every instance shipped here is finite-state and
//! stabilizes before ω.

use std::fmt;
use std::ops::Index;

use thiserror::Error;

/// A value lattice as seen by the iteration engine: an order test and a
/// bottom element.
pub trait Domain {
    type Value: Clone + PartialEq + fmt::Debug;

    /// `a ⊑ b`.
    fn leq(&self, a: &Self::Value, b: &Self::Value) -> bool;

    fn bottom(&self) -> Self::Value;
}

/// One value per state, indexed by the state's position in its system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueTable<V>(Vec<V>);

impl<V> ValueTable<V> {
    pub fn new(values: Vec<V>) -> Self {
        ValueTable(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, V> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[V] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<V> {
        self.0
    }
}

impl<V: Clone> ValueTable<V> {
    pub fn constant(len: usize, value: V) -> Self {
        ValueTable(vec![value; len])
    }
}

impl<V> Index<usize> for ValueTable<V> {
    type Output = V;

    fn index(&self, state: usize) -> &V {
        &self.0[state]
    }
}

impl<V> FromIterator<V> for ValueTable<V> {
    fn from_iter<I: IntoIterator<Item = V>>(iter: I) -> Self {
        ValueTable(iter.into_iter().collect())
    }
}

/// The all-bottom table of a given size.
pub fn bottom_table<D: Domain>(domain: &D, len: usize) -> ValueTable<D::Value> {
    ValueTable::constant(len, domain.bottom())
}

/// Pointwise extension of the domain order.
pub fn leq_pointwise<D: Domain>(
    domain: &D,
    lhs: &ValueTable<D::Value>,
    rhs: &ValueTable<D::Value>,
) -> bool {
    lhs.len() == rhs.len() && lhs.iter().zip(rhs.iter()).all(|(a, b)| domain.leq(a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationConfig {
    max_iterations: usize,
}

impl IterationConfig {
    pub fn new(max_iterations: usize) -> Result<Self, FixpointError> {
        if max_iterations == 0 {
            return Err(FixpointError::ZeroBudget);
        }
        Ok(IterationConfig { max_iterations })
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationResult<V> {
    pub table: ValueTable<V>,
    /// Number of step applications performed.
    pub iterations_used: usize,
    /// `true` iff `table` is an exact fixed point of the step map. When the
    /// budget runs out this is `false` and `table` is the last iterate.
    pub stabilized: bool,
}

/// A state where `candidate(x) ⊑ step(candidate)(x)` fails.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation<V> {
    pub state: usize,
    pub candidate: V,
    pub step_value: V,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixpointError {
    #[error("iteration budget must be at least 1")]
    ZeroBudget,
    #[error("start table is not a post-fixed point (first violation at state index {state})")]
    NotPostfixed { state: usize },
    #[error("step map is not monotone: iterate {iteration} decreased at state index {state}")]
    NonMonotone { iteration: usize, state: usize },
    #[error("step map changed the table size from {expected} to {found}")]
    SizeMismatch { expected: usize, found: usize },
}

/// Least fixed point of `step` by Kleene iteration from `bottom`.
///
/// The chain `⊥ ⊑ Φ(⊥) ⊑ Φ²(⊥) ⊑ …` is checked as it is built; a decreasing
/// step is reported as [`FixpointError::NonMonotone`] rather than silently
/// producing a non-least fixed point.
pub fn kleene_lfp<D, F>(
    domain: &D,
    step: F,
    bottom: ValueTable<D::Value>,
    cfg: IterationConfig,
) -> Result<IterationResult<D::Value>, FixpointError>
where
    D: Domain,
    F: Fn(&ValueTable<D::Value>) -> ValueTable<D::Value>,
{
    iterate(domain, &step, bottom, cfg)
}

/// Iterates `step` upward from a post-fixed point `start ⊑ step(start)`.
///
/// The result is a fixed point above `start`; it need not be the least one.
pub fn iterate_from_postfix<D, F>(
    domain: &D,
    step: F,
    start: ValueTable<D::Value>,
    cfg: IterationConfig,
) -> Result<IterationResult<D::Value>, FixpointError>
where
    D: Domain,
    F: Fn(&ValueTable<D::Value>) -> ValueTable<D::Value>,
{
    let first = step(&start);
    if first.len() != start.len() {
        return Err(FixpointError::SizeMismatch {
            expected: start.len(),
            found: first.len(),
        });
    }
    if let Some(state) = (0..start.len()).find(|&i| !domain.leq(&start[i], &first[i])) {
        return Err(FixpointError::NotPostfixed { state });
    }
    iterate(domain, &step, start, cfg)
}

fn iterate<D, F>(
    domain: &D,
    step: &F,
    start: ValueTable<D::Value>,
    cfg: IterationConfig,
) -> Result<IterationResult<D::Value>, FixpointError>
where
    D: Domain,
    F: Fn(&ValueTable<D::Value>) -> ValueTable<D::Value>,
{
    let mut current = start;
    for iteration in 1..=cfg.max_iterations {
        let next = step(&current);
        if next.len() != current.len() {
            return Err(FixpointError::SizeMismatch {
                expected: current.len(),
                found: next.len(),
            });
        }
        if next == current {
            return Ok(IterationResult {
                table: current,
                iterations_used: iteration,
                stabilized: true,
            });
        }
        if let Some(state) = (0..current.len()).find(|&i| !domain.leq(&current[i], &next[i])) {
            return Err(FixpointError::NonMonotone { iteration, state });
        }
        current = next;
    }
    Ok(IterationResult {
        table: current,
        iterations_used: cfg.max_iterations,
        stabilized: false,
    })
}

/// All states where `candidate ⊑ step(candidate)` fails. Empty iff the
/// candidate is a post-fixed point, i.e. a ranking certificate for the
/// algebra behind `step`.
pub fn check_postfixed<D, F>(
    domain: &D,
    step: F,
    candidate: &ValueTable<D::Value>,
) -> Vec<Violation<D::Value>>
where
    D: Domain,
    F: Fn(&ValueTable<D::Value>) -> ValueTable<D::Value>,
{
    let image = step(candidate);
    assert_eq!(image.len(), candidate.len(), "step map must preserve table size");
    candidate
        .iter()
        .zip(image.iter())
        .enumerate()
        .filter(|(_, (c, s))| !domain.leq(c, s))
        .map(|(state, (c, s))| Violation {
            state,
            candidate: c.clone(),
            step_value: s.clone(),
        })
        .collect()
}

/// Two-valued truth domain `{0 ≤ 1}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoolDomain;

impl Domain for BoolDomain {
    type Value = bool;

    fn leq(&self, a: &bool, b: &bool) -> bool {
        !*a || *b
    }

    fn bottom(&self) -> bool {
        false
    }
}

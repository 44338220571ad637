//! Deterministic tree automata.
//!
//! Every state has exactly one transition `f(x_1, …, x_k)` with `k` the arity
//! of `f`, plus an accepting flag, so each state has a unique run tree. A
//! state is live when every branch of its run tree hits an accepting state,
//! i.e. the least fixed point of `σ_t`: 1 if accepting or all children are 1.
//!
//! Certificates assign each state a finite unlabeled tree or `⊥`. Trees are
//! ordered by the prefix order `D ⪯ D'` (every node of `D` is either a leaf
//! or has as many children as the corresponding node of `D'`), and
//! `D ⊑ D'` iff `D = ⊥` or `D' ⪯ D`: a shorter tree is a better rank.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::ModelError;
use crate::fixpoint::{bottom_table, kleene_lfp, BoolDomain, IterationConfig, ValueTable};
use crate::game::check_unique;
use crate::report::{CheckReport, ReportValue, Violation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeAutomaton {
    symbols: Vec<(String, usize)>,
    names: Vec<String>,
    trans: Vec<(usize, Vec<usize>)>,
    accepting: Vec<bool>,
}

impl TreeAutomaton {
    /// `trans[x] = (symbol index, children)`; children counts must match
    /// the symbol's arity.
    pub fn new(
        symbols: Vec<(String, usize)>,
        names: Vec<String>,
        trans: Vec<(usize, Vec<usize>)>,
        accepting: Vec<bool>,
    ) -> Result<Self, ModelError> {
        let n = names.len();
        if trans.len() != n || accepting.len() != n {
            return Err(ModelError::Coverage {
                expected: n,
                found: trans.len().min(accepting.len()),
            });
        }
        check_unique(&names)?;
        let mut seen = std::collections::BTreeSet::new();
        for (s, _) in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(ModelError::DuplicateSymbol(s.clone()));
            }
        }
        for (x, (sym, children)) in trans.iter().enumerate() {
            let Some((sname, arity)) = symbols.get(*sym) else {
                return Err(ModelError::UndeclaredSymbol(format!("#{sym}")));
            };
            if children.len() != *arity {
                return Err(ModelError::ArityMismatch {
                    state: names[x].clone(),
                    symbol: sname.clone(),
                    arity: *arity,
                    found: children.len(),
                });
            }
            if let Some(&index) = children.iter().find(|&&c| c >= n) {
                return Err(ModelError::StateOutOfRange { index, len: n });
            }
        }
        Ok(TreeAutomaton {
            symbols,
            names,
            trans,
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

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    pub fn symbol(&self, state: usize) -> &str {
        &self.symbols[self.trans[state].0].0
    }

    pub fn children(&self, state: usize) -> &[usize] {
        &self.trans[state].1
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }
}

/// Name-based construction, mostly for fixtures and tests.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    symbols: Vec<(String, usize)>,
    names: Vec<String>,
    accepting: Vec<bool>,
    trans: Vec<(String, String, Vec<String>)>,
}

impl TreeBuilder {
    pub fn symbol(mut self, name: &str, arity: usize) -> Self {
        self.symbols.push((name.to_string(), arity));
        self
    }

    pub fn state(mut self, name: &str, accepting: bool) -> Self {
        self.names.push(name.to_string());
        self.accepting.push(accepting);
        self
    }

    pub fn trans(mut self, state: &str, symbol: &str, children: &[&str]) -> Self {
        self.trans.push((
            state.to_string(),
            symbol.to_string(),
            children.iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<TreeAutomaton, ModelError> {
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
        let mut trans: Vec<Option<(usize, Vec<usize>)>> = vec![None; self.names.len()];
        for (state, symbol, children) in &self.trans {
            let sym = self
                .symbols
                .iter()
                .position(|(s, _)| s == symbol)
                .ok_or_else(|| ModelError::UndeclaredSymbol(symbol.clone()))?;
            let kids = children.iter().map(|c| lookup(c)).collect::<Result<_, _>>()?;
            trans[lookup(state)?] = Some((sym, kids));
        }
        let trans = trans
            .into_iter()
            .enumerate()
            .map(|(x, t)| t.ok_or_else(|| ModelError::MissingTransition(self.names[x].clone())))
            .collect::<Result<_, _>>()?;
        TreeAutomaton::new(self.symbols.clone(), self.names.clone(), trans, self.accepting.clone())
    }
}

/// Handle to a node of a [`TreeArena`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

/// Hash-consed finite unlabeled trees: structurally equal trees share one
/// node, so tree equality is handle equality.
#[derive(Clone, Debug, Default)]
pub struct TreeArena {
    nodes: Vec<Vec<NodeId>>,
    index: HashMap<Vec<NodeId>, NodeId>,
}

impl TreeArena {
    pub fn new() -> Self {
        TreeArena::default()
    }

    /// The node with the given ordered children.
    pub fn node(&mut self, children: Vec<NodeId>) -> NodeId {
        if let Some(&id) = self.index.get(&children) {
            return id;
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("arena overflow"));
        self.nodes.push(children.clone());
        self.index.insert(children, id);
        id
    }

    pub fn leaf(&mut self) -> NodeId {
        self.node(Vec::new())
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self, id: NodeId) -> usize {
        let mut memo = HashMap::new();
        self.depth_memo(id, &mut memo)
    }

    fn depth_memo(&self, id: NodeId, memo: &mut HashMap<NodeId, usize>) -> usize {
        if let Some(&d) = memo.get(&id) {
            return d;
        }
        let d = self
            .children(id)
            .iter()
            .map(|&c| self.depth_memo(c, memo) + 1)
            .max()
            .unwrap_or(0);
        memo.insert(id, d);
        d
    }

    /// `a ⪯ b`: `a` is a prefix of `b`.
    pub fn is_prefix(&self, a: NodeId, b: NodeId) -> bool {
        let mut memo = HashMap::new();
        self.prefix_memo(a, b, &mut memo)
    }

    fn prefix_memo(&self, a: NodeId, b: NodeId, memo: &mut HashMap<(NodeId, NodeId), bool>) -> bool {
        if a == b {
            return true;
        }
        if let Some(&r) = memo.get(&(a, b)) {
            return r;
        }
        let (ca, cb) = (self.children(a), self.children(b));
        let r = ca.is_empty()
            || (ca.len() == cb.len()
                && ca.iter().zip(cb).all(|(&x, &y)| self.prefix_memo(x, y, memo)));
        memo.insert((a, b), r);
        r
    }

    /// Nested parentheses: a leaf is `()`, a node `(c1 c2 …)`.
    pub fn render(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.render_into(id, &mut out);
        out
    }

    fn render_into(&self, id: NodeId, out: &mut String) {
        out.push('(');
        for (i, &c) in self.children(id).iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            self.render_into(c, out);
        }
        out.push(')');
    }

    /// Inverse of [`TreeArena::render`], also accepting `bot`.
    pub fn parse(&mut self, text: &str) -> Result<TreeOrBottom, String> {
        let text = text.trim();
        if text == "bot" {
            return Ok(TreeOrBottom::Bottom);
        }
        let bytes = text.as_bytes();
        let mut stack: Vec<Vec<NodeId>> = Vec::new();
        let mut root = None;
        for (pos, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => {
                    if root.is_some() {
                        return Err(format!("trailing input at offset {pos}"));
                    }
                    stack.push(Vec::new());
                }
                b')' => {
                    let kids = stack
                        .pop()
                        .ok_or_else(|| format!("unbalanced `)` at offset {pos}"))?;
                    let id = self.node(kids);
                    match stack.last_mut() {
                        Some(parent) => parent.push(id),
                        None => root = Some(id),
                    }
                }
                b' ' | b'\t' => {}
                _ => return Err(format!("unexpected `{}` at offset {pos}", b as char)),
            }
        }
        if !stack.is_empty() {
            return Err("unbalanced `(`".into());
        }
        root.map(TreeOrBottom::Tree).ok_or_else(|| "empty tree".into())
    }

    /// `a ⊑ b` on trees-or-bottom.
    pub fn rank_leq(&self, a: TreeOrBottom, b: TreeOrBottom) -> bool {
        match (a, b) {
            (TreeOrBottom::Bottom, _) => true,
            (TreeOrBottom::Tree(_), TreeOrBottom::Bottom) => false,
            (TreeOrBottom::Tree(a), TreeOrBottom::Tree(b)) => self.is_prefix(b, a),
        }
    }

    pub fn render_value(&self, v: TreeOrBottom) -> String {
        match v {
            TreeOrBottom::Bottom => "bot".to_string(),
            TreeOrBottom::Tree(id) => self.render(id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeOrBottom {
    Tree(NodeId),
    Bottom,
}

impl TreeOrBottom {
    pub fn is_bottom(&self) -> bool {
        matches!(self, TreeOrBottom::Bottom)
    }
}

/// A tree-valued certificate; node handles refer to the owned arena.
#[derive(Clone, Debug)]
pub struct TreeCert {
    pub arena: TreeArena,
    pub values: Vec<TreeOrBottom>,
}

impl TreeCert {
    pub fn render_value(&self, state: usize) -> String {
        self.arena.render_value(self.values[state])
    }
}

/// `Φ_{c,σ_t}` over boolean tables.
pub fn tree_reach_step(a: &TreeAutomaton) -> impl Fn(&ValueTable<bool>) -> ValueTable<bool> + '_ {
    move |f| {
        (0..a.len())
            .map(|x| a.is_accepting(x) || a.children(x).iter().all(|&c| f[c]))
            .collect()
    }
}

/// Per-state liveness flag: no infinite all-non-accepting branch.
pub fn tree_lfp_flags(a: &TreeAutomaton) -> Vec<bool> {
    let cfg = IterationConfig::new(a.len() + 2).expect("positive budget");
    let res = kleene_lfp(&BoolDomain, tree_reach_step(a), bottom_table(&BoolDomain, a.len()), cfg)
        .expect("tree step is monotone");
    assert!(res.stabilized, "finite automaton must stabilize within |X|+1 rounds");
    res.table.into_vec()
}

pub fn tree_lfp_reach(a: &TreeAutomaton) -> std::collections::BTreeSet<usize> {
    tree_lfp_flags(a)
        .into_iter()
        .enumerate()
        .filter(|(_, f)| *f)
        .map(|(x, _)| x)
        .collect()
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("certificate covers {found} states, automaton has {expected}")]
pub struct TreeCoverageError {
    pub expected: usize,
    pub found: usize,
}

/// Passes iff at every non-accepting state the value is `⊥`, or no child is
/// `⊥` and the combined children tree is a prefix of the value. Accepting
/// states always pass. The bound is 1 exactly where the value is a tree.
pub fn check_tree_ranking(
    a: &TreeAutomaton,
    cert: &TreeCert,
) -> Result<CheckReport, TreeCoverageError> {
    if cert.values.len() != a.len() {
        return Err(TreeCoverageError {
            expected: a.len(),
            found: cert.values.len(),
        });
    }
    let arena = &cert.arena;
    let mut violations = Vec::new();
    let mut fixed_point = true;
    for x in 0..a.len() {
        let value = cert.values[x];
        let kids = a.children(x);
        if a.is_accepting(x) {
            fixed_point &= match value {
                TreeOrBottom::Tree(id) => arena.children(id).is_empty(),
                TreeOrBottom::Bottom => false,
            };
            continue;
        }
        let child_values: Vec<TreeOrBottom> = kids.iter().map(|&c| cert.values[c]).collect();
        let any_bottom = child_values.iter().any(|v| v.is_bottom());
        fixed_point &= match value {
            TreeOrBottom::Bottom => any_bottom,
            TreeOrBottom::Tree(id) => {
                !any_bottom
                    && arena.children(id).len() == kids.len()
                    && arena
                        .children(id)
                        .iter()
                        .zip(&child_values)
                        .all(|(n, v)| TreeOrBottom::Tree(*n) == *v)
            }
        };
        let TreeOrBottom::Tree(id) = value else {
            continue;
        };
        let expected = || {
            let mut s = String::from("(");
            for (i, v) in child_values.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{}", arena.render_value(*v));
            }
            s.push(')');
            s
        };
        if any_bottom {
            violations.push(
                Violation::new(a.name(x), "bot", arena.render(id))
                    .with_detail("a child is bottom, so the state must be bottom"),
            );
            continue;
        }
        // combine(children) ⪯ value
        let node_kids = arena.children(id);
        let ok = kids.is_empty()
            || (node_kids.len() == kids.len()
                && child_values.iter().zip(node_kids).all(|(v, &n)| match v {
                    TreeOrBottom::Tree(c) => arena.is_prefix(*c, n),
                    TreeOrBottom::Bottom => false,
                }));
        if !ok {
            violations.push(
                Violation::new(a.name(x), expected(), arena.render(id))
                    .with_detail("combined children tree is not a prefix of the value"),
            );
        }
    }
    let bound = cert
        .values
        .iter()
        .enumerate()
        .map(|(x, v)| (a.name(x).to_string(), ReportValue::indicator(!v.is_bottom())))
        .collect();
    Ok(CheckReport::new("trank", violations, bound, fixed_point))
}

/// The optimal certificate: `⊥` outside the live set, a leaf at accepting
/// states, and the combination of the children's trees elsewhere. Sharing
/// keeps the arena at no more than one node per state.
pub fn synthesize_tree_rank(a: &TreeAutomaton) -> TreeCert {
    let live = tree_lfp_flags(a);
    let mut arena = TreeArena::new();
    let mut memo: Vec<Option<NodeId>> = vec![None; a.len()];
    for x in 0..a.len() {
        if live[x] {
            build(a, x, &live, &mut arena, &mut memo);
        }
    }
    let values = memo
        .into_iter()
        .map(|m| m.map_or(TreeOrBottom::Bottom, TreeOrBottom::Tree))
        .collect();
    TreeCert { arena, values }
}

fn build(
    a: &TreeAutomaton,
    x: usize,
    live: &[bool],
    arena: &mut TreeArena,
    memo: &mut [Option<NodeId>],
) -> NodeId {
    if let Some(id) = memo[x] {
        return id;
    }
    let id = if a.is_accepting(x) {
        arena.leaf()
    } else {
        // live non-accepting states have live children and no live cycle
        let kids = a
            .children(x)
            .iter()
            .map(|&c| {
                debug_assert!(live[c]);
                build(a, c, live, arena, memo)
            })
            .collect();
        arena.node(kids)
    };
    memo[x] = Some(id);
    id
}

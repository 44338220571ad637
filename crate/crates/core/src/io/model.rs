//! Line-oriented model format.
//!
//! ```text
//! system game | pts | tree | bipartite
//! symbol f/2                  # tree automata only
//! state x0 [accept]
//! min y0                      # bipartite games only
//! move x0 : {x2} {x1 x2}      # game: options of max, members chosen by min
//! move x0 : 1/2 x1, 1/2 x3    # pts
//! move x0 : f(x1, x2)         # tree
//! move x0 : y0 y1             # bipartite: successors
//! ```

use std::collections::HashMap;

use super::{is_identifier, lines, Line, ParseError};
use crate::error::ModelError;
use crate::game::{GameCoalgebra, GameStructure};
use crate::pts::PtsCoalgebra;
use crate::tree::TreeAutomaton;
use crate::value::{fmt_rational, parse_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Game,
    Pts,
    Tree,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Game => "game",
            ModelKind::Pts => "pts",
            ModelKind::Tree => "tree",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelDocument {
    Game(GameCoalgebra),
    Pts(PtsCoalgebra),
    Tree(TreeAutomaton),
}

impl ModelDocument {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelDocument::Game(_) => ModelKind::Game,
            ModelDocument::Pts(_) => ModelKind::Pts,
            ModelDocument::Tree(_) => ModelKind::Tree,
        }
    }

    pub fn names(&self) -> &[String] {
        match self {
            ModelDocument::Game(c) => c.names(),
            ModelDocument::Pts(c) => c.names(),
            ModelDocument::Tree(a) => a.names(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Game,
    Pts,
    Tree,
    Bipartite,
}

struct Decl {
    name: String,
    accepting: bool,
    min: bool,
}

struct Move<'a> {
    line: Line<'a>,
    state: String,
    state_col: usize,
    body: &'a str,
}

/// A word with its 1-based column.
type Word<'a> = (&'a str, usize);

pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let mut iter = lines(text);
    let header = iter
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "empty model: expected `system <kind>`"))?;
    let words = header.words();
    if words.first() != Some(&"system") || words.len() != 2 {
        return Err(header.err(1, "expected `system game|pts|tree|bipartite`"));
    }
    let section = match words[1] {
        "game" => Section::Game,
        "pts" => Section::Pts,
        "tree" => Section::Tree,
        "bipartite" => Section::Bipartite,
        other => return Err(header.err(header.col(words[1]), format!("unknown system `{other}`"))),
    };
    let mut decls: Vec<Decl> = Vec::new();
    let mut decl_line: HashMap<String, usize> = HashMap::new();
    let mut symbols: Vec<(String, usize)> = Vec::new();
    let mut moves: Vec<Move> = Vec::new();
    for line in iter {
        let words = line.words();
        match words[0] {
            "symbol" => {
                if section != Section::Tree {
                    return Err(line.err(line.col(words[0]), "symbols are only allowed in tree models"));
                }
                if words.len() != 2 {
                    return Err(line.err(line.col(words[0]), "expected `symbol <name>/<arity>`"));
                }
                let (name, arity) = words[1]
                    .split_once('/')
                    .ok_or_else(|| line.err(line.col(words[1]), "expected `<name>/<arity>`"))?;
                if !is_identifier(name) {
                    return Err(line.err(line.col(words[1]), format!("invalid symbol name `{name}`")));
                }
                let arity: usize = arity
                    .parse()
                    .map_err(|_| line.err(line.col(words[1]), format!("invalid arity `{arity}`")))?;
                if symbols.iter().any(|(s, _)| s == name) {
                    return Err(line.err(line.col(words[1]), format!("duplicate symbol `{name}`")));
                }
                symbols.push((name.to_string(), arity));
            }
            "state" | "min" => {
                let min = words[0] == "min";
                if min && section != Section::Bipartite {
                    return Err(line.err(line.col(words[0]), "min states are only allowed in bipartite models"));
                }
                let accepting = match &words[1..] {
                    [_] => false,
                    [_, "accept"] if !min => true,
                    _ => {
                        return Err(line.err(
                            line.col(words[0]),
                            if min { "expected `min <id>`" } else { "expected `state <id> [accept]`" },
                        ))
                    }
                };
                let name = words[1];
                if !is_identifier(name) {
                    return Err(line.err(line.col(name), format!("invalid state name `{name}`")));
                }
                if decl_line.contains_key(name) {
                    return Err(line.err(line.col(name), format!("duplicate state `{name}`")));
                }
                decl_line.insert(name.to_string(), line.number);
                decls.push(Decl {
                    name: name.to_string(),
                    accepting,
                    min,
                });
            }
            "move" => {
                let rest = &line.text[line.col(words[0]) - 1 + 4..];
                let (head, body) = rest
                    .split_once(':')
                    .ok_or_else(|| line.err(line.col(words[0]), "expected `move <id> : …`"))?;
                let state = head.trim();
                if state.is_empty() || state.contains(char::is_whitespace) {
                    return Err(line.err(line.col(head), "expected a single state before `:`"));
                }
                let state_col = line.col(head) + (head.len() - head.trim_start().len());
                if moves.iter().any(|m| m.state == state) {
                    return Err(line.err(state_col, format!("second move for `{state}`")));
                }
                moves.push(Move {
                    state: state.to_string(),
                    state_col,
                    body,
                    line,
                });
            }
            other => {
                return Err(line.err(line.col(other), format!("unknown directive `{other}`")));
            }
        }
    }
    build(section, decls, &decl_line, symbols, moves)
}

fn build(
    section: Section,
    decls: Vec<Decl>,
    decl_line: &HashMap<String, usize>,
    symbols: Vec<(String, usize)>,
    moves: Vec<Move>,
) -> Result<ModelDocument, ParseError> {
    let semantic = |e| semantic(&moves, decl_line, e);
    // max-side (or only) states, and min states of bipartite games
    let max_names: Vec<String> = decls.iter().filter(|d| !d.min).map(|d| d.name.clone()).collect();
    let min_names: Vec<String> = decls.iter().filter(|d| d.min).map(|d| d.name.clone()).collect();
    let accepting: Vec<bool> = decls.iter().filter(|d| !d.min).map(|d| d.accepting).collect();
    let max_index: HashMap<&str, usize> =
        max_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let min_index: HashMap<&str, usize> =
        min_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let resolve = |m: &Move, index: &HashMap<&str, usize>, (word, col): Word| {
        index
            .get(word)
            .copied()
            .ok_or_else(|| m.line.err(col, format!("undeclared state `{word}`")))
    };
    let source_of = |m: &Move| {
        max_index.get(m.state.as_str()).copied().ok_or_else(|| {
            let what = if min_index.contains_key(m.state.as_str()) { "min" } else { "undeclared" };
            (what, m.line.err(m.state_col, format!("undeclared state `{}`", m.state)))
        })
    };
    match section {
        Section::Game => {
            let mut options = vec![Vec::new(); max_names.len()];
            for m in &moves {
                let x = source_of(m).map_err(|e| e.1)?;
                for group in braces(m)? {
                    let set = group
                        .into_iter()
                        .map(|w| resolve(m, &max_index, w))
                        .collect::<Result<Vec<_>, _>>()?;
                    options[x].push(set);
                }
            }
            let c = GameCoalgebra::new(max_names, options, accepting)
                .map_err(semantic)?;
            Ok(ModelDocument::Game(c))
        }
        Section::Bipartite => {
            let mut max_moves = vec![Vec::new(); max_names.len()];
            let mut min_moves = vec![Vec::new(); min_names.len()];
            for m in &moves {
                let targets = words_of(m);
                match source_of(m) {
                    Ok(x) => {
                        for w in targets {
                            max_moves[x].push(resolve(m, &min_index, w)?);
                        }
                    }
                    Err(("min", _)) => {
                        let y = min_index[m.state.as_str()];
                        for w in targets {
                            min_moves[y].push(resolve(m, &max_index, w)?);
                        }
                    }
                    Err((_, e)) => return Err(e),
                }
            }
            let g = GameStructure {
                max_names,
                min_names,
                max_moves,
                min_moves,
                accepting,
            };
            let c = g.to_coalgebra().map_err(semantic)?;
            Ok(ModelDocument::Game(c))
        }
        Section::Pts => {
            let mut next = vec![Vec::new(); max_names.len()];
            for m in &moves {
                let x = source_of(m).map_err(|e| e.1)?;
                for item in split_top(m.body, ',') {
                    let words: Vec<&str> = item.split_whitespace().collect();
                    let col = m.line.col(item) + (item.len() - item.trim_start().len());
                    let [p, y] = words[..] else {
                        return Err(m.line.err(col, "expected `<probability> <state>`"));
                    };
                    let prob = parse_rational(p).ok_or_else(|| {
                        m.line.err(col, format!("invalid probability `{p}` (use p/q or an integer)"))
                    })?;
                    let y = resolve(m, &max_index, (y, m.line.col(item) + item.find(y).unwrap_or(0)))?;
                    next[x].push((y, prob));
                }
            }
            let c = PtsCoalgebra::new(max_names, next, accepting).map_err(semantic)?;
            Ok(ModelDocument::Pts(c))
        }
        Section::Tree => {
            let mut trans: Vec<Option<(usize, Vec<usize>)>> = vec![None; max_names.len()];
            for m in &moves {
                let x = source_of(m).map_err(|e| e.1)?;
                let body = m.body.trim();
                let col = m.line.col(m.body) + (m.body.len() - m.body.trim_start().len());
                let (sym, args) = match body.split_once('(') {
                    Some((sym, rest)) => {
                        let inner = rest
                            .strip_suffix(')')
                            .ok_or_else(|| m.line.err(col, "expected `)` at end of transition"))?;
                        (sym.trim(), Some(inner))
                    }
                    None => (body, None),
                };
                let s = symbols
                    .iter()
                    .position(|(name, _)| name == sym)
                    .ok_or_else(|| m.line.err(col, format!("undeclared symbol `{sym}`")))?;
                let mut kids = Vec::new();
                if let Some(inner) = args {
                    if !inner.trim().is_empty() {
                        for part in inner.split(',') {
                            let name = part.trim();
                            let c = m.line.col(part) + (part.len() - part.trim_start().len());
                            kids.push(resolve(m, &max_index, (name, c))?);
                        }
                    }
                }
                if kids.len() != symbols[s].1 {
                    return Err(m.line.err(
                        col,
                        format!(
                            "symbol `{sym}` has arity {} but `{}` lists {} children",
                            symbols[s].1,
                            m.state,
                            kids.len()
                        ),
                    ));
                }
                trans[x] = Some((s, kids));
            }
            let trans = trans
                .into_iter()
                .enumerate()
                .map(|(x, t)| {
                    t.ok_or_else(|| semantic(ModelError::MissingTransition(max_names[x].clone())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let a = TreeAutomaton::new(symbols, max_names, trans, accepting)
                .map_err(semantic)?;
            Ok(ModelDocument::Tree(a))
        }
    }
}

/// Attaches a position to a constructor error via the offending state's move.
fn semantic(moves: &[Move], decl_line: &HashMap<String, usize>, err: ModelError) -> ParseError {
    let state = match &err {
        ModelError::ProbabilitySum { state, .. }
        | ModelError::NonPositiveProbability { state, .. }
        | ModelError::DuplicateSuccessor { state, .. }
        | ModelError::ArityMismatch { state, .. } => Some(state.clone()),
        ModelError::MissingTransition(state) => Some(state.clone()),
        _ => None,
    };
    let Some(state) = state else {
        return ParseError::new(1, 1, err.to_string());
    };
    match moves.iter().find(|m| m.state == state) {
        Some(m) => m.line.err(m.state_col, err.to_string()),
        None => ParseError::new(decl_line.get(&state).copied().unwrap_or(1), 1, err.to_string()),
    }
}

fn words_of<'a>(m: &Move<'a>) -> Vec<Word<'a>> {
    m.body
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(|w| (w, m.line.col(w)))
        .collect()
}

/// `{a b} {} {c}` → groups of words.
fn braces<'a>(m: &Move<'a>) -> Result<Vec<Vec<Word<'a>>>, ParseError> {
    let body = m.body;
    let mut groups = Vec::new();
    let mut rest = body;
    loop {
        let trimmed = rest.trim_start();
        if trimmed.is_empty() {
            break;
        }
        let col = m.line.col(trimmed);
        let inner_start = trimmed
            .strip_prefix('{')
            .ok_or_else(|| m.line.err(col, "expected `{` to open an option"))?;
        let close = inner_start
            .find('}')
            .ok_or_else(|| m.line.err(col, "unclosed `{`"))?;
        let inner = &inner_start[..close];
        if inner.contains('{') {
            return Err(m.line.err(m.line.col(inner), "nested `{`"));
        }
        groups.push(
            inner
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|w| !w.is_empty())
                .map(|w| (w, m.line.col(w)))
                .collect(),
        );
        rest = &inner_start[close + 1..];
    }
    Ok(groups)
}

fn split_top(body: &str, sep: char) -> Vec<&str> {
    if body.trim().is_empty() {
        return Vec::new();
    }
    body.split(sep).collect()
}

/// Canonical text for a model; [`parse_model`] inverts it.
pub fn serialize_model(doc: &ModelDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!("system {}\n", doc.kind().as_str()));
    let state_lines = |out: &mut String, names: &[String], acc: &[bool]| {
        for (n, a) in names.iter().zip(acc) {
            out.push_str(&format!("state {n}{}\n", if *a { " accept" } else { "" }));
        }
    };
    match doc {
        ModelDocument::Game(c) => {
            state_lines(&mut out, c.names(), c.accepting());
            for x in 0..c.len() {
                if c.options(x).is_empty() {
                    continue;
                }
                let groups: Vec<String> = c
                    .options(x)
                    .iter()
                    .map(|opt| format!("{{{}}}", c.names_of(opt).join(" ")))
                    .collect();
                out.push_str(&format!("move {} : {}\n", c.name(x), groups.join(" ")));
            }
        }
        ModelDocument::Pts(c) => {
            state_lines(&mut out, c.names(), c.accepting());
            for x in 0..c.len() {
                let items: Vec<String> = c
                    .next(x)
                    .iter()
                    .map(|(y, p): &(usize, Rational)| format!("{} {}", fmt_rational(p), c.name(*y)))
                    .collect();
                out.push_str(&format!("move {} : {}\n", c.name(x), items.join(", ")));
            }
        }
        ModelDocument::Tree(a) => {
            for (s, arity) in a.symbols() {
                out.push_str(&format!("symbol {s}/{arity}\n"));
            }
            state_lines(&mut out, a.names(), a.accepting());
            for x in 0..a.len() {
                let kids: Vec<&str> = a.children(x).iter().map(|&c| a.name(c)).collect();
                out.push_str(&format!(
                    "move {} : {}({})\n",
                    a.name(x),
                    a.symbol(x),
                    kids.join(", ")
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::game_lfp_reach;
    use crate::pts::pts_reach_exact;
    use crate::value::{int, rat};

    const EX2_8: &str = "\
# two branches, one lossy
system pts
state x0
state x1
state x2 accept
state x3
move x0 : 1/2 x1, 1/2 x3
move x1 : 1/2 x1, 1/2 x2
move x2 : 1 x2
move x3 : 1 x3
";

    #[test]
    fn parses_pts() {
        let ModelDocument::Pts(c) = parse_model(EX2_8).unwrap() else { panic!() };
        assert_eq!(c.len(), 4);
        assert_eq!(pts_reach_exact(&c), vec![rat(1, 2), int(1), int(1), int(0)]);
    }

    #[test]
    fn parses_single_state_game() {
        let ModelDocument::Game(c) = parse_model("system game\nstate a accept\n").unwrap() else {
            panic!()
        };
        assert_eq!(c.len(), 1);
        assert!(c.is_accepting(0));
    }

    #[test]
    fn parses_game_options() {
        let text = "system game\nstate x0\nstate x1\nstate x2 accept\nstate x3\n\
                    move x0 : {x2} {x1 x2}\nmove x3 : {}\n";
        let ModelDocument::Game(c) = parse_model(text).unwrap() else { panic!() };
        assert_eq!(c.options(0), &[vec![1, 2], vec![2]]);
        assert_eq!(c.options(3), &[Vec::<usize>::new()]);
        assert_eq!(game_lfp_reach(&c).len(), 3);
    }

    #[test]
    fn sum_error_names_state() {
        let text = "system pts\nstate a\nstate b\nmove a : 1/2 b, 1/3 a\nmove b : 1 b\n";
        let err = parse_model(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("`a`") && err.message.contains("5/6"), "{err}");
    }

    #[test]
    fn decimals_rejected() {
        let err = parse_model("system pts\nstate a\nmove a : 1.0 a\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 10));
        assert!(err.message.contains("invalid probability"));
    }

    #[test]
    fn undeclared_state_located() {
        let err = parse_model("system game\nstate a\nmove a : {a zz}\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 13));
        assert_eq!(err.message, "undeclared state `zz`");
    }

    #[test]
    fn arity_mismatch() {
        let text = "system tree\nsymbol f/2\nstate x accept\nmove x : f(x)\n";
        let err = parse_model(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("arity 2"));
    }

    #[test]
    fn missing_header() {
        let err = parse_model("state a\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
    }

    #[test]
    fn bipartite_import() {
        let text = "system bipartite\nstate x0\nstate x1 accept\nmin y0\nmin y1\n\
                    move x0 : y0 y1\nmove y0 : x1\nmove y1 : x0 x1\n";
        let ModelDocument::Game(c) = parse_model(text).unwrap() else { panic!() };
        assert_eq!(c.options(0), &[vec![0, 1], vec![1]]);
        assert_eq!(game_lfp_reach(&c).len(), 2);
    }

    #[test]
    fn tree_round_trip() {
        let text = "system tree\nsymbol f/2\nsymbol c/0\nstate x\nstate y accept\n\
                    move x : f(y, y)\nmove y : c()\n";
        let doc = parse_model(text).unwrap();
        assert_eq!(serialize_model(&doc), text);
        assert_eq!(parse_model("system tree\nsymbol c/0\nstate y\nmove y : c\n").unwrap().names(), ["y"]);
    }

    #[test]
    fn pts_round_trip() {
        let doc = parse_model(EX2_8).unwrap();
        assert_eq!(parse_model(&serialize_model(&doc)).unwrap(), doc);
    }
}

//! Certificate format.
//!
//! ```text
//! certificate rank cap=omega          # or cap=<n>
//! certificate arank epsilon=1
//! certificate mrank alpha=3/4 delta=1
//! certificate drank horizon=32
//! certificate ncrank gamma=9/10
//! certificate trank
//! x0 = <value>
//! ```
//!
//! Values are naturals or `omega` (rank), rationals or `inf` (arank, mrank),
//! rationals (ncrank), nested parentheses or `bot` (trank), and
//! distributions `{ 0: 1/4, geo(2, 1/4, 1/2), beyond(64): 1/8, inf: 1/4 }`
//! (drank).

use std::collections::{BTreeMap, HashMap};

use super::{is_identifier, lines, Line, ParseError};
use crate::error::ModelError;
use crate::game::{OrdinalValue, RankCertificate};
use crate::pts::{AdditiveCert, DistCert, Geometric, MultiplicativeCert, NonCountingCert, TailSpec};
use crate::tree::{TreeArena, TreeCert, TreeOrBottom};
use crate::value::{fmt_rational, parse_rational, Extended, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertParams {
    Rank { cap: OrdinalValue },
    Additive { epsilon: Rational },
    Multiplicative { alpha: Rational, delta: Rational },
    Distribution { horizon: u64 },
    NonCounting { gamma: Rational },
    Tree,
}

impl CertParams {
    pub fn kind(&self) -> &'static str {
        match self {
            CertParams::Rank { .. } => "rank",
            CertParams::Additive { .. } => "arank",
            CertParams::Multiplicative { .. } => "mrank",
            CertParams::Distribution { .. } => "drank",
            CertParams::NonCounting { .. } => "ncrank",
            CertParams::Tree => "trank",
        }
    }

    fn header(&self) -> String {
        let params = match self {
            CertParams::Rank { cap } => format!(" cap={cap}"),
            CertParams::Additive { epsilon } => format!(" epsilon={}", fmt_rational(epsilon)),
            CertParams::Multiplicative { alpha, delta } => {
                format!(" alpha={} delta={}", fmt_rational(alpha), fmt_rational(delta))
            }
            CertParams::Distribution { horizon } => format!(" horizon={horizon}"),
            CertParams::NonCounting { gamma } => format!(" gamma={}", fmt_rational(gamma)),
            CertParams::Tree => String::new(),
        };
        format!("certificate {}{params}", self.kind())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertValue {
    Ordinal(OrdinalValue),
    Extended(Extended),
    Rational(Rational),
    Tail(TailSpec),
    Tree(TreeOrBottom),
}

/// A parsed certificate, keyed by state name. Tree values refer to `arena`.
#[derive(Clone, Debug)]
pub struct CertificateDocument {
    pub params: CertParams,
    pub values: Vec<(String, CertValue)>,
    pub arena: TreeArena,
}

impl PartialEq for CertificateDocument {
    /// Tree values are compared structurally, not by handle.
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.to_text() == other.to_text()
    }
}

pub fn parse_certificate(text: &str) -> Result<CertificateDocument, ParseError> {
    let mut iter = lines(text);
    let header = iter
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "empty certificate: expected `certificate <kind>`"))?;
    let params = parse_header(&header)?;
    let mut arena = TreeArena::new();
    let mut values: Vec<(String, CertValue)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for line in iter {
        let (name, raw) = line
            .text
            .split_once('=')
            .ok_or_else(|| line.err(1, "expected `<state> = <value>`"))?;
        let name_col = line.col(name) + (name.len() - name.trim_start().len());
        let name = name.trim();
        if !is_identifier(name) {
            return Err(line.err(name_col, format!("invalid state name `{name}`")));
        }
        if let Some(prev) = seen.insert(name.to_string(), line.number) {
            return Err(line.err(
                name_col,
                format!("state `{name}` already given a value on line {prev}"),
            ));
        }
        let col = line.col(raw) + (raw.len() - raw.trim_start().len());
        let raw = raw.trim();
        let value = parse_value(&params, raw, &mut arena).map_err(|m| line.err(col, m))?;
        values.push((name.to_string(), value));
    }
    Ok(CertificateDocument {
        params,
        values,
        arena,
    })
}

fn parse_header(line: &Line) -> Result<CertParams, ParseError> {
    let words = line.words();
    if words.first() != Some(&"certificate") || words.len() < 2 {
        return Err(line.err(1, "expected `certificate <kind> [key=value…]`"));
    }
    let mut kv: BTreeMap<&str, (&str, usize)> = BTreeMap::new();
    for w in &words[2..] {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| line.err(line.col(w), format!("expected key=value, found `{w}`")))?;
        if kv.insert(k, (v, line.col(w))).is_some() {
            return Err(line.err(line.col(w), format!("parameter `{k}` given twice")));
        }
    }
    let kind_col = line.col(words[1]);
    let mut take = |key: &str| {
        kv.remove(key)
            .ok_or_else(|| line.err(kind_col, format!("missing parameter `{key}`")))
    };
    let rational = |(v, col): (&str, usize)| {
        parse_rational(v).ok_or_else(|| line.err(col, format!("invalid rational `{v}`")))
    };
    let params = match words[1] {
        "rank" => {
            let (v, col) = take("cap")?;
            let cap = match v {
                "omega" => OrdinalValue::Omega,
                n => OrdinalValue::Fin(
                    n.parse()
                        .map_err(|_| line.err(col, format!("invalid cap `{n}`")))?,
                ),
            };
            CertParams::Rank { cap }
        }
        "arank" => CertParams::Additive {
            epsilon: rational(take("epsilon")?)?,
        },
        "mrank" => CertParams::Multiplicative {
            alpha: rational(take("alpha")?)?,
            delta: rational(take("delta")?)?,
        },
        "drank" => {
            let (v, col) = take("horizon")?;
            let horizon: u64 = v
                .parse()
                .map_err(|_| line.err(col, format!("invalid horizon `{v}`")))?;
            if horizon == 0 {
                return Err(line.err(col, "horizon must be at least 1"));
            }
            CertParams::Distribution { horizon }
        }
        "ncrank" => CertParams::NonCounting {
            gamma: rational(take("gamma")?)?,
        },
        "trank" => CertParams::Tree,
        other => return Err(line.err(kind_col, format!("unknown certificate kind `{other}`"))),
    };
    if let Some((k, (_, col))) = kv.into_iter().next() {
        return Err(line.err(col, format!("unexpected parameter `{k}`")));
    }
    Ok(params)
}

fn parse_value(params: &CertParams, raw: &str, arena: &mut TreeArena) -> Result<CertValue, String> {
    let rational = |s: &str| parse_rational(s).ok_or_else(|| format!("invalid rational `{s}`"));
    match params {
        CertParams::Rank { .. } => match raw {
            "omega" => Ok(CertValue::Ordinal(OrdinalValue::Omega)),
            n => n
                .parse()
                .map(|n| CertValue::Ordinal(OrdinalValue::Fin(n)))
                .map_err(|_| format!("invalid rank `{n}` (natural or `omega`)")),
        },
        CertParams::Additive { .. } | CertParams::Multiplicative { .. } => match raw {
            "inf" => Ok(CertValue::Extended(Extended::Infinity)),
            q => Ok(CertValue::Extended(Extended::Finite(rational(q)?))),
        },
        CertParams::NonCounting { .. } => Ok(CertValue::Rational(rational(raw)?)),
        CertParams::Distribution { .. } => parse_tail(raw).map(CertValue::Tail),
        CertParams::Tree => arena.parse(raw).map(CertValue::Tree),
    }
}

fn parse_tail(raw: &str) -> Result<TailSpec, String> {
    let inner = raw
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or("distribution must be enclosed in `{ … }`")?;
    let mut atoms = BTreeMap::new();
    let mut geo = None;
    let mut deferred = None;
    let mut inf = None;
    let rational = |s: &str| parse_rational(s).ok_or_else(|| format!("invalid rational `{}`", s.trim()));
    for item in split_items(inner) {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if let Some(args) = item.strip_prefix("geo(").and_then(|s| s.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').collect();
            let [start, coeff, ratio] = parts[..] else {
                return Err("expected `geo(start, coeff, ratio)`".into());
            };
            if geo.is_some() {
                return Err("at most one geometric tail".into());
            }
            geo = Some(Geometric {
                start: start.trim().parse().map_err(|_| format!("invalid start `{}`", start.trim()))?,
                coeff: rational(coeff)?,
                ratio: rational(ratio)?,
            });
            continue;
        }
        let (key, mass) = item
            .split_once(':')
            .ok_or_else(|| format!("expected `<index>: <mass>`, found `{item}`"))?;
        let mass = rational(mass)?;
        let key = key.trim();
        if key == "inf" {
            if inf.replace(mass).is_some() {
                return Err("mass at `inf` given twice".into());
            }
        } else if let Some(after) = key.strip_prefix("beyond(").and_then(|s| s.strip_suffix(')')) {
            let after: u64 = after.trim().parse().map_err(|_| format!("invalid index `{after}`"))?;
            if deferred.replace((after, mass)).is_some() {
                return Err("at most one `beyond` entry".into());
            }
        } else {
            let index: u64 = key.parse().map_err(|_| format!("invalid index `{key}`"))?;
            if atoms.insert(index, mass).is_some() {
                return Err(format!("index {index} given twice"));
            }
        }
    }
    let inf = inf.unwrap_or_else(|| Rational::from_integer(0.into()));
    TailSpec::new(atoms, geo, deferred, inf).map_err(|e| match e {
        ModelError::InvalidCertificate(m) => m,
        other => other.to_string(),
    })
}

/// Splits on commas outside parentheses.
fn split_items(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl CertificateDocument {
    pub fn kind(&self) -> &'static str {
        self.params.kind()
    }

    pub fn to_text(&self) -> String {
        let mut out = self.params.header();
        out.push('\n');
        for (name, value) in &self.values {
            let v = match value {
                CertValue::Ordinal(o) => o.to_string(),
                CertValue::Extended(e) => e.to_string(),
                CertValue::Rational(q) => fmt_rational(q),
                CertValue::Tail(t) => t.to_string(),
                CertValue::Tree(t) => self.arena.render_value(*t),
            };
            out.push_str(&format!("{name} = {v}\n"));
        }
        out
    }

    /// Values in the order of `names`; every state exactly once.
    fn ordered(&self, names: &[String]) -> Result<Vec<&CertValue>, ModelError> {
        let by_name: HashMap<&str, &CertValue> =
            self.values.iter().map(|(n, v)| (n.as_str(), v)).collect();
        if let Some((n, _)) = self.values.iter().find(|(n, _)| !names.contains(n)) {
            return Err(ModelError::UnknownValue(n.clone()));
        }
        names
            .iter()
            .map(|n| {
                by_name
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| ModelError::MissingValue(n.clone()))
            })
            .collect()
    }

    fn wrong_kind(&self, wanted: &str) -> ModelError {
        ModelError::InvalidCertificate(format!(
            "expected a {wanted} certificate, found {}",
            self.kind()
        ))
    }

    pub fn to_rank(&self, names: &[String]) -> Result<RankCertificate, ModelError> {
        let CertParams::Rank { cap } = self.params else {
            return Err(self.wrong_kind("rank"));
        };
        let values = self
            .ordered(names)?
            .into_iter()
            .map(|v| match v {
                CertValue::Ordinal(o) => *o,
                _ => unreachable!("values parsed per kind"),
            })
            .collect();
        RankCertificate::new(cap, values)
    }

    fn extended_values(&self, names: &[String]) -> Result<Vec<Extended>, ModelError> {
        Ok(self
            .ordered(names)?
            .into_iter()
            .map(|v| match v {
                CertValue::Extended(e) => e.clone(),
                _ => unreachable!("values parsed per kind"),
            })
            .collect())
    }

    pub fn to_additive(&self, names: &[String]) -> Result<AdditiveCert, ModelError> {
        let CertParams::Additive { epsilon } = &self.params else {
            return Err(self.wrong_kind("arank"));
        };
        AdditiveCert::new(epsilon.clone(), self.extended_values(names)?)
    }

    pub fn to_multiplicative(&self, names: &[String]) -> Result<MultiplicativeCert, ModelError> {
        let CertParams::Multiplicative { alpha, delta } = &self.params else {
            return Err(self.wrong_kind("mrank"));
        };
        MultiplicativeCert::new(alpha.clone(), delta.clone(), self.extended_values(names)?)
    }

    pub fn to_distribution(&self, names: &[String]) -> Result<DistCert, ModelError> {
        let CertParams::Distribution { horizon } = self.params else {
            return Err(self.wrong_kind("drank"));
        };
        let values = self
            .ordered(names)?
            .into_iter()
            .map(|v| match v {
                CertValue::Tail(t) => t.clone(),
                _ => unreachable!("values parsed per kind"),
            })
            .collect();
        DistCert::new(horizon, values)
    }

    pub fn to_noncounting(&self, names: &[String]) -> Result<NonCountingCert, ModelError> {
        let CertParams::NonCounting { gamma } = &self.params else {
            return Err(self.wrong_kind("ncrank"));
        };
        let values = self
            .ordered(names)?
            .into_iter()
            .map(|v| match v {
                CertValue::Rational(q) => q.clone(),
                _ => unreachable!("values parsed per kind"),
            })
            .collect();
        NonCountingCert::new(gamma.clone(), values)
    }

    pub fn to_tree(&self, names: &[String]) -> Result<TreeCert, ModelError> {
        if self.params != CertParams::Tree {
            return Err(self.wrong_kind("trank"));
        }
        let values = self
            .ordered(names)?
            .into_iter()
            .map(|v| match v {
                CertValue::Tree(t) => *t,
                _ => unreachable!("values parsed per kind"),
            })
            .collect();
        Ok(TreeCert {
            arena: self.arena.clone(),
            values,
        })
    }

    fn zip<T>(names: &[String], values: impl IntoIterator<Item = T>, f: impl Fn(T) -> CertValue) -> Vec<(String, CertValue)> {
        names.iter().cloned().zip(values.into_iter().map(f)).collect()
    }

    pub fn from_rank(names: &[String], cert: &RankCertificate) -> Self {
        CertificateDocument {
            params: CertParams::Rank { cap: cert.cap() },
            values: Self::zip(names, cert.values().iter().copied(), CertValue::Ordinal),
            arena: TreeArena::new(),
        }
    }

    pub fn from_additive(names: &[String], cert: &AdditiveCert) -> Self {
        CertificateDocument {
            params: CertParams::Additive {
                epsilon: cert.epsilon().clone(),
            },
            values: Self::zip(names, cert.values().iter().cloned(), CertValue::Extended),
            arena: TreeArena::new(),
        }
    }

    pub fn from_multiplicative(names: &[String], cert: &MultiplicativeCert) -> Self {
        CertificateDocument {
            params: CertParams::Multiplicative {
                alpha: cert.alpha().clone(),
                delta: cert.delta().clone(),
            },
            values: Self::zip(names, cert.values().iter().cloned(), CertValue::Extended),
            arena: TreeArena::new(),
        }
    }

    pub fn from_distribution(names: &[String], cert: &DistCert) -> Self {
        CertificateDocument {
            params: CertParams::Distribution {
                horizon: cert.horizon(),
            },
            values: Self::zip(names, cert.values().iter().cloned(), CertValue::Tail),
            arena: TreeArena::new(),
        }
    }

    pub fn from_noncounting(names: &[String], cert: &NonCountingCert) -> Self {
        CertificateDocument {
            params: CertParams::NonCounting {
                gamma: cert.gamma().clone(),
            },
            values: Self::zip(names, cert.values().iter().cloned(), CertValue::Rational),
            arena: TreeArena::new(),
        }
    }

    pub fn from_tree(names: &[String], cert: &TreeCert) -> Self {
        CertificateDocument {
            params: CertParams::Tree,
            values: Self::zip(names, cert.values.iter().copied(), CertValue::Tree),
            arena: cert.arena.clone(),
        }
    }
}

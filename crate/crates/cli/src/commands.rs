use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use corank::game::{
    check_game_ranking, extract_strategy, game_lfp_reach, synthesize_game_rank, GameCoalgebra,
    OrdinalValue,
};
use corank::io::{
    parse_certificate, parse_model, render_report, render_table, CertParams, CertificateDocument,
    Format, ModelDocument,
};
use corank::pts::{
    check_additive, check_distribution_ranking, check_multiplicative, check_noncounting,
    default_gamma_schedule, gamma_sweep, pts_reach_exact, pts_reach_iter, solve_discounted,
    synthesize_hitting_distribution, NonCountingCert, PtsCoalgebra,
};
use corank::testkit::monte_carlo_reach;
use corank::tree::{check_tree_ranking, synthesize_tree_rank, tree_lfp_flags};
use corank::value::{fmt_rational, parse_rational};
use corank::{CheckReport, Rational, ReportValue, Verdict};

use crate::{Command, OutputFormat, SynthKind};

pub const DEFAULT_HORIZON: u64 = 64;
pub const DEFAULT_SCHEDULE_K: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok = 0,
    CertificateFailed = 1,
}

fn format(f: OutputFormat) -> Format {
    match f {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(path: &Path) -> Result<ModelDocument> {
    parse_model(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_cert(path: &Path) -> Result<CertificateDocument> {
    parse_certificate(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn rational_flag(name: &str, text: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| anyhow!("--{name}: `{text}` is not an exact rational"))
}

fn indicator(flag: bool) -> String {
    if flag { "1" } else { "0" }.to_string()
}

fn param(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn run(command: Command, out: OutputFormat) -> Result<Outcome> {
    let fmt = format(out);
    match command {
        Command::Solve { model, state, iter } => solve(&model, state, iter, fmt),
        Command::Check {
            model,
            cert,
            horizon,
            reference,
        } => check(&model, &cert, horizon, reference, fmt),
        Command::Synthesize {
            model,
            kind,
            cap,
            gamma,
            horizon,
            output,
        } => {
            let text = synthesize(&model, kind, cap, gamma, horizon)?;
            match output {
                Some(path) => fs::write(&path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(Outcome::Ok)
        }
        Command::Strategy { model, cert } => strategy(&model, &cert, fmt),
        Command::Sweep { model, gammas } => sweep(&model, gammas, fmt),
        Command::Simulate {
            model,
            state,
            trials,
            max_steps,
            seed,
        } => {
            let seed = match std::env::var("CORANK_SEED") {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| anyhow!("CORANK_SEED: `{s}` is not an unsigned integer"))?,
                Err(_) => seed,
            };
            simulate(&model, &state, trials, max_steps, seed, fmt)
        }
    }
}

fn solve(model: &Path, state: Option<String>, iter: Option<usize>, fmt: Format) -> Result<Outcome> {
    let doc = load_model(model)?;
    if iter.is_some() && !matches!(doc, ModelDocument::Pts(_)) {
        bail!("--iter applies to probabilistic models only");
    }
    if let Some(s) = &state {
        if !doc.names().contains(s) {
            bail!("unknown state `{s}`");
        }
    }
    let (kind, values): (&str, Vec<String>) = match &doc {
        ModelDocument::Game(c) => {
            let won = game_lfp_reach(c);
            ("reach", (0..c.len()).map(|x| indicator(won.contains(&x))).collect())
        }
        ModelDocument::Pts(c) => {
            let v = match iter {
                Some(n) => pts_reach_iter(c, n),
                None => pts_reach_exact(c),
            };
            ("reach", v.iter().map(fmt_rational).collect())
        }
        ModelDocument::Tree(a) => ("tree-reach", tree_lfp_flags(a).into_iter().map(indicator).collect()),
    };
    let mut params = vec![param("system", doc.kind().as_str())];
    if let Some(n) = iter {
        params.push(param("iter", n));
    }
    let rows: Vec<Vec<String>> = doc
        .names()
        .iter()
        .zip(values)
        .filter(|(n, _)| state.as_ref().is_none_or(|s| s == *n))
        .map(|(n, v)| vec![n.clone(), v])
        .collect();
    print!("{}", render_table(kind, &params, &["state", "value"], &rows, fmt));
    Ok(Outcome::Ok)
}

fn reference(doc: &ModelDocument) -> Vec<(String, ReportValue)> {
    let values: Vec<ReportValue> = match doc {
        ModelDocument::Game(c) => {
            let won = game_lfp_reach(c);
            (0..c.len()).map(|x| ReportValue::indicator(won.contains(&x))).collect()
        }
        ModelDocument::Pts(c) => pts_reach_exact(c).into_iter().map(ReportValue::Rational).collect(),
        ModelDocument::Tree(a) => tree_lfp_flags(a).into_iter().map(ReportValue::indicator).collect(),
    };
    doc.names().iter().cloned().zip(values).collect()
}

fn mismatch(doc: &ModelDocument, cert: &CertificateDocument) -> anyhow::Error {
    anyhow!(
        "a {} certificate does not apply to a {} model",
        cert.kind(),
        doc.kind().as_str()
    )
}

fn check_report(doc: &ModelDocument, cert: &CertificateDocument, horizon: Option<u64>) -> Result<CheckReport> {
    if horizon.is_some() && !matches!(cert.params, CertParams::Distribution { .. }) {
        bail!("--horizon applies to drank certificates only");
    }
    if horizon == Some(0) {
        bail!("--horizon must be at least 1");
    }
    let report = match (doc, &cert.params) {
        (ModelDocument::Game(c), CertParams::Rank { .. }) => {
            check_game_ranking(c, &cert.to_rank(c.names())?)?
        }
        (ModelDocument::Pts(c), CertParams::Additive { .. }) => {
            check_additive(c, &cert.to_additive(c.names())?)?
        }
        (ModelDocument::Pts(c), CertParams::Multiplicative { .. }) => {
            check_multiplicative(c, &cert.to_multiplicative(c.names())?)?
        }
        (ModelDocument::Pts(c), CertParams::Distribution { .. }) => {
            let mut d = cert.to_distribution(c.names())?;
            if let Some(h) = horizon {
                d = d.with_horizon(h)?;
            }
            check_distribution_ranking(c, &d)?
        }
        (ModelDocument::Pts(c), CertParams::NonCounting { .. }) => {
            check_noncounting(c, &cert.to_noncounting(c.names())?)?
        }
        (ModelDocument::Tree(a), CertParams::Tree) => check_tree_ranking(a, &cert.to_tree(a.names())?)?,
        _ => return Err(mismatch(doc, cert)),
    };
    Ok(report)
}

fn check(model: &Path, cert: &Path, horizon: Option<u64>, with_reference: bool, fmt: Format) -> Result<Outcome> {
    let doc = load_model(model)?;
    let crt = load_cert(cert)?;
    let mut report = check_report(&doc, &crt, horizon)?;
    if with_reference {
        report = report.with_reference(reference(&doc));
    }
    print!("{}", render_report(&report, fmt));
    Ok(match report.verdict {
        Verdict::Fail => Outcome::CertificateFailed,
        Verdict::Pass | Verdict::VerifiedUpToHorizon { .. } => Outcome::Ok,
    })
}

fn parse_cap(text: &str) -> Result<OrdinalValue> {
    match text {
        "omega" => Ok(OrdinalValue::Omega),
        n => n
            .parse()
            .map(OrdinalValue::Fin)
            .map_err(|_| anyhow!("--cap: `{n}` is neither a natural number nor `omega`")),
    }
}

fn synthesize(
    model: &Path,
    kind: SynthKind,
    cap: Option<String>,
    gamma: Option<String>,
    horizon: Option<u64>,
) -> Result<String> {
    let allowed = |flag: &str, set: bool, wanted: SynthKind| {
        if set && kind != wanted {
            bail!("--{flag} does not apply to --kind {kind:?}");
        }
        Ok(())
    };
    allowed("cap", cap.is_some(), SynthKind::Rank)?;
    allowed("gamma", gamma.is_some(), SynthKind::Ncrank)?;
    allowed("horizon", horizon.is_some(), SynthKind::Drank)?;
    let cap = cap.as_deref().map(parse_cap).transpose()?;
    let gamma = gamma.as_deref().map(|g| rational_flag("gamma", g)).transpose()?;
    if kind == SynthKind::Ncrank && gamma.is_none() {
        bail!("--kind ncrank needs --gamma");
    }
    let doc = load_model(model)?;
    let (header, body) = match (&doc, kind) {
        (ModelDocument::Game(c), SynthKind::Rank) => {
            let cap = cap.unwrap_or(OrdinalValue::Omega);
            let b = synthesize_game_rank(c, cap);
            (format!("cap={cap}"), CertificateDocument::from_rank(c.names(), &b))
        }
        (ModelDocument::Pts(c), SynthKind::Drank) => {
            let h = horizon.unwrap_or(DEFAULT_HORIZON);
            let d = synthesize_hitting_distribution(c, h)?;
            (format!("horizon={h}"), CertificateDocument::from_distribution(c.names(), &d))
        }
        (ModelDocument::Pts(c), SynthKind::Ncrank) => {
            let gamma = gamma.expect("checked above");
            let v = solve_discounted(c, &gamma)?;
            let b = NonCountingCert::new(gamma.clone(), v)?;
            (format!("gamma={}", fmt_rational(&gamma)), CertificateDocument::from_noncounting(c.names(), &b))
        }
        (ModelDocument::Tree(a), SynthKind::Trank) => {
            (String::new(), CertificateDocument::from_tree(a.names(), &synthesize_tree_rank(a)))
        }
        _ => bail!("--kind {kind:?} does not apply to a {} model", doc.kind().as_str()),
    };
    let header = format!("# synthesized {} {header}", body.kind());
    Ok(format!("{}\n{}", header.trim_end(), body.to_text()))
}

fn render_option(c: &GameCoalgebra, members: &[usize]) -> String {
    format!("{{{}}}", c.names_of(members).join(" "))
}

fn strategy(model: &Path, cert: &Path, fmt: Format) -> Result<Outcome> {
    let doc = load_model(model)?;
    let crt = load_cert(cert)?;
    let ModelDocument::Game(c) = &doc else {
        return Err(mismatch(&doc, &crt));
    };
    let CertParams::Rank { cap } = crt.params else {
        return Err(mismatch(&doc, &crt));
    };
    let b = crt.to_rank(c.names())?;
    let report = check_game_ranking(c, &b)?;
    if report.failed() {
        eprint!("{}", render_report(&report, Format::Text));
        return Ok(Outcome::CertificateFailed);
    }
    let s = extract_strategy(c, &b)?;
    let rows: Vec<Vec<String>> = (0..c.len())
        .filter_map(|x| {
            s.choice(x).map(|k| {
                vec![
                    c.name(x).to_string(),
                    render_option(c, &c.options(x)[k]),
                    b.value(x).to_string(),
                ]
            })
        })
        .collect();
    let params = [param("cap", cap)];
    print!("{}", render_table("strategy", &params, &["state", "option", "rank"], &rows, fmt));
    Ok(Outcome::Ok)
}

fn pts_model(model: &Path) -> Result<PtsCoalgebra> {
    match load_model(model)? {
        ModelDocument::Pts(c) => Ok(c),
        other => bail!("expected a pts model, found {}", other.kind().as_str()),
    }
}

fn sweep(model: &Path, gammas: Option<Vec<String>>, fmt: Format) -> Result<Outcome> {
    let (schedule, label) = match gammas {
        Some(list) => (
            list.iter()
                .map(|g| rational_flag("gammas", g.trim()))
                .collect::<Result<Vec<_>>>()?,
            "custom".to_string(),
        ),
        None => (
            default_gamma_schedule(DEFAULT_SCHEDULE_K),
            format!("1-2^-k k=1..{DEFAULT_SCHEDULE_K}"),
        ),
    };
    let c = pts_model(model)?;
    let table = gamma_sweep(&c, &schedule)?;
    match fmt {
        Format::Text => {
            println!("# sweep schedule={label}");
            print!("{}", table.to_csv(c.names()));
        }
        Format::Json => {
            let mut header = vec!["gamma"];
            header.extend(c.names().iter().map(String::as_str));
            let mut rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|(g, v)| std::iter::once(fmt_rational(g)).chain(v.iter().map(fmt_rational)).collect())
                .collect();
            rows.push(std::iter::once("sup".to_string()).chain(table.sup.iter().map(fmt_rational)).collect());
            print!("{}", render_table("sweep", &[param("schedule", label)], &header, &rows, fmt));
        }
    }
    Ok(Outcome::Ok)
}

fn simulate(model: &Path, state: &str, trials: usize, max_steps: usize, seed: u64, fmt: Format) -> Result<Outcome> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let c = pts_model(model)?;
    let x = c.index_of(state).ok_or_else(|| anyhow!("unknown state `{state}`"))?;
    let (estimate, std_err) = monte_carlo_reach(&c, x, trials, max_steps, seed);
    let params = [
        param("trials", trials),
        param("max_steps", max_steps),
        param("seed", seed),
    ];
    let rows = vec![vec![state.to_string(), format!("{estimate:.6}"), format!("{std_err:.6}")]];
    print!("{}", render_table("simulate", &params, &["state", "estimate", "std_error"], &rows, fmt));
    Ok(Outcome::Ok)
}

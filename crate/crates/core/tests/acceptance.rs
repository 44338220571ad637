//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use corank::fixpoint::ValueTable;
use corank::game::{
    check_game_ranking, game_lfp_reach, incompleteness_chain, synthesize_game_rank, OrdinalValue,
};
use corank::pts::{
    additive_step, check_additive, check_distribution_ranking, check_noncounting,
    convert_multiplicative, default_gamma_schedule, gamma_sweep, pts_reach_exact, rankdom2,
    solve_discounted, synthesize_hitting_distribution, verify_additive_dominates, AdditiveCert,
    DEFAULT_PRECISION,
};
use corank::testkit::{
    brute_force_game_reach, enumerate_tree_paths, monte_carlo_reach, random_game, random_pts,
    random_pts_almost_sure, random_tree, InstanceKind, RandomInstanceSpec,
};
use corank::tree::{check_tree_ranking, synthesize_tree_rank, tree_lfp_flags};
use corank::{Extended, Rational, ReportValue, Verdict};
use num_traits::{One, ToPrimitive, Zero};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn certified(report: &corank::CheckReport) -> Vec<&str> {
    report.certified_states()
}

fn golden_examples() -> Outcome {
    let start = Instant::now();
    let tpg = game("tpg.lvs");
    let reach = game_lfp_reach(&tpg);
    ensure(tpg.names_of(&reach) == ["x0", "x2", "x3"], || format!("TPG reach {reach:?}"))?;

    for (model, crt) in [("tpg.lvs", "tpg.crt"), ("intro_game.lvs", "intro_game.crt")] {
        let c = game(model);
        let b = cert(crt).to_rank(c.names()).map_err(|e| e.to_string())?;
        let report = check_game_ranking(&c, &b).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("{crt} fails: {:?}", report.violations))?;
    }

    let ex = pts("ex2_8.lvs");
    let want = vec![rat(1, 2), int(1), int(1), int(0)];
    ensure(pts_reach_exact(&ex) == want, || "ex2_8 reach vector".into())?;
    let b = cert("ex2_8.crt").to_additive(ex.names()).map_err(|e| e.to_string())?;
    let report = check_additive(&ex, &b).map_err(|e| e.to_string())?;
    ensure(report.passed() && certified(&report) == ["x1", "x2"], || {
        format!("ex2_8 additive: {report:?}")
    })?;

    let nonas = pts("rptsnonas.lvs");
    let d = cert("rptsnonas.crt").to_distribution(nonas.names()).map_err(|e| e.to_string())?;
    let report = check_distribution_ranking(&nonas, &d).map_err(|e| e.to_string())?;
    ensure(report.verdict == Verdict::Pass, || format!("drank verdict {}", report.verdict))?;
    ensure(
        report.bound_of("x0") == Some(&ReportValue::Rational(rat(1, 2))),
        || format!("drank bound {:?}", report.bound_of("x0")),
    )?;

    for k in 1..=10 {
        let gamma = rat(k, 11);
        let v = solve_discounted(&nonas, &gamma).map_err(|e| e.to_string())?;
        let closed = &gamma / (int(3) - &gamma);
        ensure(v[0] == closed, || format!("γ={gamma}: {} vs {closed}", v[0]))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok("TPG, intro game, ex2_8, RptsNonAS, 10 discount factors".into())
}

fn non_corecursive_witness() -> Outcome {
    let c = pts("notcorec.lvs");
    for eps in [int(1), rat(1, 2), int(3)] {
        let b1 = vec![
            Extended::Finite(&eps * rat(5, 2)),
            Extended::Finite(&eps * int(2)),
            Extended::Finite(eps.clone()),
            Extended::zero(),
        ];
        let b2 = vec![
            Extended::Infinity,
            Extended::Infinity,
            Extended::Finite(eps.clone()),
            Extended::zero(),
        ];
        ensure(b1 != b2, || "witnesses coincide".into())?;
        for b in [b1, b2] {
            let image = additive_step(&c, &eps)(&ValueTable::new(b.clone())).into_vec();
            ensure(image == b, || format!("ε={eps}: image {image:?} differs from {b:?}"))?;
            let cert = AdditiveCert::new(eps.clone(), b).map_err(|e| e.to_string())?;
            let report = check_additive(&c, &cert).map_err(|e| e.to_string())?;
            ensure(report.passed() && report.fixed_point, || format!("ε={eps}: {report:?}"))?;
        }
    }
    Ok("ε ∈ {1, 1/2, 3}".into())
}

fn incompleteness_family() -> Outcome {
    for n in 1..=10usize {
        let c = incompleteness_chain(n);
        ensure(game_lfp_reach(&c).contains(&n), || format!("x{n} not winning"))?;
        for (cap, want) in [(n as u64, false), (n as u64 + 1, true)] {
            let b = synthesize_game_rank(&c, OrdinalValue::Fin(cap));
            let report = check_game_ranking(&c, &b).map_err(|e| e.to_string())?;
            let got = certified(&report).contains(&format!("x{n}").as_str());
            ensure(report.passed() && got == want, || {
                format!("n={n} cap={cap}: certified={got}")
            })?;
        }
    }
    Ok("n = 1..10".into())
}

fn check_bound_below(
    what: &str,
    seed: u64,
    bound: &[(String, ReportValue)],
    lfp: &[Rational],
) -> Result<(), String> {
    for ((s, b), l) in bound.iter().zip(lfp) {
        let b = b.as_rational().cloned().unwrap_or_else(Rational::one);
        ensure(b <= *l, || format!("{what} seed {seed}: bound {b} at {s} exceeds {l}"))?;
    }
    Ok(())
}

fn flags(set: &std::collections::BTreeSet<usize>, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|x| if set.contains(&x) { Rational::one() } else { Rational::zero() })
        .collect()
}

const SOUNDNESS_INSTANCES: u64 = 500;

fn soundness_suites() -> Outcome {
    let start = Instant::now();
    let mut passing = [0usize; 5];
    for seed in 0..SOUNDNESS_INSTANCES {
        let mut r = rng(seed);

        let g = random_game(&RandomInstanceSpec::new(InstanceKind::Game, seed));
        let lfp = flags(&brute_force_game_reach(&g, g.len()), g.len());
        for b in game_candidates(&g, &mut r) {
            let report = check_game_ranking(&g, &b).map_err(|e| e.to_string())?;
            if report.passed() {
                passing[0] += 1;
                check_bound_below("rank", seed, &report.bound, &lfp)?;
            }
        }

        let p = random_pts(&RandomInstanceSpec::new(InstanceKind::Pts, seed).states(2, 5));
        let reach = exact_reach(&p);
        let as_flags: Vec<Rational> = reach
            .iter()
            .map(|q| if q.is_one() { Rational::one() } else { Rational::zero() })
            .collect();
        for b in additive_candidates(&p, &mut r) {
            let report = check_additive(&p, &b).map_err(|e| e.to_string())?;
            if report.passed() {
                passing[1] += 1;
                check_bound_below("arank", seed, &report.bound, &as_flags)?;
            }
        }
        for b in distribution_candidates(&p, &mut r) {
            let report = check_distribution_ranking(&p, &b).map_err(|e| e.to_string())?;
            if !report.failed() {
                passing[2] += 1;
                check_bound_below("drank", seed, &report.bound, &reach)?;
            }
        }
        for b in noncounting_candidates(&p, &mut r) {
            let report = check_noncounting(&p, &b).map_err(|e| e.to_string())?;
            if report.passed() {
                passing[3] += 1;
                check_bound_below("ncrank", seed, &report.bound, &reach)?;
            }
        }

        let a = random_tree(&RandomInstanceSpec::new(InstanceKind::Tree, seed));
        let live: Vec<Rational> = enumerate_tree_paths(&a, a.len() + 1)
            .iter()
            .map(|dead| if *dead { Rational::zero() } else { Rational::one() })
            .collect();
        for b in tree_candidates(&a, &mut r) {
            let report = check_tree_ranking(&a, &b).map_err(|e| e.to_string())?;
            if report.passed() {
                passing[4] += 1;
                check_bound_below("trank", seed, &report.bound, &live)?;
            }
        }
    }
    ensure(passing.iter().all(|&n| n > 0), || format!("no passing candidates: {passing:?}"))?;
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{SOUNDNESS_INSTANCES} instances per kind, passing rank/arank/drank/ncrank/trank {passing:?}, {took:?}"
    ))
}

const COMPLETENESS_INSTANCES: u64 = 200;

fn completeness_suites() -> Outcome {
    let mut bounded = 0;
    for seed in 0..COMPLETENESS_INSTANCES {
        let p = random_pts(&RandomInstanceSpec::new(InstanceKind::Pts, 10_000 + seed).states(2, 5));
        let reach = exact_reach(&p);
        let b = synthesize_hitting_distribution(&p, 16).map_err(|e| e.to_string())?;
        let report = check_distribution_ranking(&p, &b).map_err(|e| e.to_string())?;
        ensure(!report.failed(), || format!("pts seed {seed}: {:?}", report.violations))?;
        if report.verdict != Verdict::Pass {
            bounded += 1;
        }
        for ((s, v), r) in report.bound.iter().zip(&reach) {
            ensure(v.as_rational() == Some(r), || format!("pts seed {seed}: {s} bound {v} vs {r}"))?;
        }

        let a = random_tree(&RandomInstanceSpec::new(InstanceKind::Tree, 10_000 + seed));
        let t = synthesize_tree_rank(&a);
        let report = check_tree_ranking(&a, &t).map_err(|e| e.to_string())?;
        ensure(report.passed() && report.fixed_point, || format!("tree seed {seed}"))?;
        let dead = enumerate_tree_paths(&a, a.len() + 1);
        for ((s, v), d) in report.bound.iter().zip(&dead) {
            let want = ReportValue::indicator(!d);
            ensure(*v == want, || format!("tree seed {seed}: {s} bound {v}"))?;
        }
    }
    Ok(format!(
        "{COMPLETENESS_INSTANCES} PTSs and tree automata; {bounded} PTS verdicts bounded by the horizon"
    ))
}

fn certificate_conversions() -> Outcome {
    let mut checked = 0;
    for seed in 0..100 {
        let p = random_pts_almost_sure(&RandomInstanceSpec::new(InstanceKind::Pts, 20_000 + seed).states(2, 6));
        ensure(exact_reach(&p).iter().all(|r| r.is_one()), || format!("seed {seed} not almost sure"))?;
        let e = exact_hitting_time(&p);
        let mut r = rng(seed);
        for b in additive_candidates(&p, &mut r) {
            if !check_additive(&p, &b).map_err(|e| e.to_string())?.passed() {
                continue;
            }
            checked += 1;
            for (x, (h, v)) in e.iter().zip(b.values()).enumerate() {
                let lower = h.scale(b.epsilon());
                ensure(lower <= *v, || format!("seed {seed}: {} has {v} below {lower}", p.name(x)))?;
            }
            let dom = verify_additive_dominates(&p, &b).map_err(|e| e.to_string())?;
            ensure(dom.passed(), || format!("seed {seed}: dominance report fails"))?;
        }
    }

    let c = pts("notcorec.lvs");
    let m = cert("notcorec_mult.crt").to_multiplicative(c.names()).map_err(|e| e.to_string())?;
    for eps in [int(1), rat(1, 2), int(3)] {
        let conv = convert_multiplicative(&c, &m, &eps, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
        ensure(conv.report.passed(), || format!("example, ε={eps}: {:?}", conv.report.violations))?;
    }
    let mut converted = 0;
    let mut seed = 30_000;
    while converted < 50 {
        seed += 1;
        ensure(seed < 31_000, || format!("only {converted} multiplicative instances found"))?;
        let p = random_pts_almost_sure(&RandomInstanceSpec::new(InstanceKind::Pts, seed).states(2, 6));
        let Some(m) = multiplicative_for(&p, &int(1)) else {
            continue;
        };
        let conv = convert_multiplicative(&p, &m, &int(1), DEFAULT_PRECISION).map_err(|e| e.to_string())?;
        ensure(conv.report.passed(), || format!("seed {seed}: {:?}", conv.report.violations))?;
        converted += 1;
    }
    Ok(format!("{checked} passing additive certificates dominated; {converted} random conversions"))
}

fn oracle_equivalence() -> Outcome {
    for seed in 0..300 {
        let g = random_game(&RandomInstanceSpec::new(InstanceKind::Game, 40_000 + seed));
        ensure(brute_force_game_reach(&g, g.len()) == game_lfp_reach(&g), || {
            format!("game seed {seed}")
        })?;
        let a = random_tree(&RandomInstanceSpec::new(InstanceKind::Tree, 40_000 + seed));
        let dead = enumerate_tree_paths(&a, a.len() + 1);
        let live = tree_lfp_flags(&a);
        ensure(dead.iter().zip(&live).all(|(d, l)| d != l), || format!("tree seed {seed}"))?;
    }
    let trials = 100_000;
    for seed in 0..12 {
        let p = random_pts(&RandomInstanceSpec::new(InstanceKind::Pts, 50_000 + seed).states(2, 5));
        let exact = pts_reach_exact(&p);
        for (x, q) in exact.iter().enumerate() {
            let q = q.to_f64().unwrap();
            let (est, _) = monte_carlo_reach(&p, x, trials, 1000, seed);
            // standard error under the exact value; zero only when q is 0 or 1
            let sigma = (q * (1.0 - q) / trials as f64).sqrt();
            ensure((est - q).abs() <= 4.0 * sigma, || {
                format!("pts seed {seed} {}: estimate {est} vs {q} (σ={sigma})", p.name(x))
            })?;
        }
    }
    Ok("300 games, 300 tree automata, 12 PTSs at 10^5 trials".into())
}

fn sweep_convergence() -> Outcome {
    let schedule = default_gamma_schedule(20);
    let tol = rat(1, 1 << 16);
    let mut report = Vec::new();
    for (name, c) in [("rptsnonas", pts("rptsnonas.lvs")), ("rankdom2 K=4", rankdom2(4))] {
        let table = gamma_sweep(&c, &schedule).map_err(|e| e.to_string())?;
        let (last_gamma, _) = table.rows.last().unwrap();
        ensure(*last_gamma == Rational::one() - rat(1, 1 << 20), || "schedule end".into())?;
        let exact = exact_reach(&c);
        for (x, (s, r)) in table.sup.iter().zip(&exact).enumerate() {
            let gap = r - s;
            ensure(gap >= Rational::zero() && gap <= tol, || {
                format!("{name} {}: sup {s} vs {r}", c.name(x))
            })?;
        }
        let gap0 = &exact[0] - &table.sup[0];
        report.push(format!("{name} gap {:.3e}", gap0.to_f64().unwrap()));
    }
    Ok(report.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("golden examples", golden_examples),
        ("non-corecursive witness", non_corecursive_witness),
        ("incompleteness family", incompleteness_family),
        ("soundness suites", soundness_suites),
        ("completeness suites", completeness_suites),
        ("certificate conversions", certificate_conversions),
        ("oracle equivalence", oracle_equivalence),
        ("gamma sweep convergence", sweep_convergence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        match outcome {
            Ok(note) => println!("PASS {}. {name}: {note} [{:.2?}]", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

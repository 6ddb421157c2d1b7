//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use eckit::difftest::{difftest, gen_automaton, gen_up_word, GenConfig, Report};
use eckit::engine::{step, Configuration};
use eckit::model::{Atom, AtomBody, Interval, LowerBound, UpperBound};
use eckit::translate::obligations::{
    abs_step, con, live, to_bounds, BoundTable, CheckSet, Flag, NewClocks, Obligation,
    ObligationSet, Prediction,
};
use eckit::translate::Mutation;
use eckit::words::{EventKind, Symbol, Tag};
use eckit::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{all_clocks, event_value_oracle, map_chains, random_word, stack_scan_matching, successor_oracle, tags};

const CASES: usize = 200;
const WORDS: usize = 50;
const WORD_PROBES: usize = 10_000;
const ENGINE_PROBES: usize = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

struct Runs {
    reports: Vec<Report>,
}

impl Runs {
    fn new() -> Self {
        let mut configs: Vec<GenConfig> = EventKind::ALL.into_iter().map(GenConfig::for_kind).collect();
        configs.push(GenConfig::mixed());
        let reports = configs
            .into_iter()
            .map(|c| difftest(&GenConfig { cases: CASES, words_per_case: WORDS, ..c }))
            .collect();
        Runs { reports }
    }

    fn label(r: &Report) -> String {
        if r.config.clock_menu.len() == 1 {
            r.config.clock_menu[0].as_str().to_string()
        } else {
            "mixed".to_string()
        }
    }
}

fn equivalence(runs: &Runs) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in &runs.reports {
        ok &= r.mismatches.is_empty() && r.errors.is_empty() && r.cases >= CASES;
        ok &= r.comparisons >= CASES * WORDS;
        parts.push(format!("{} {}/{}", Runs::label(r), r.mismatches.len(), r.comparisons));
    }
    outcome(ok, format!("mismatches/comparisons: {}", parts.join(", ")))
}

fn size_bounds(runs: &Runs) -> Outcome {
    let steps: usize = runs.reports.iter().map(|r| r.steps).sum();
    let violations: usize = runs.reports.iter().map(|r| r.bound_violations.len()).sum();
    let largest = runs.reports.iter().map(|r| r.max_states_out).max().unwrap_or(0);
    outcome(
        violations == 0 && steps > 0,
        format!("{violations} violations over {steps} removal steps, largest output {largest} states"),
    )
}

fn max_constant(runs: &Runs) -> Outcome {
    let steps: usize = runs.reports.iter().map(|r| r.steps).sum();
    let violations: usize = runs.reports.iter().map(|r| r.constant_violations.len()).sum();
    outcome(violations == 0 && steps > 0, format!("{violations} violations over {steps} removal steps"))
}

fn rule_suite() -> Outcome {
    let mut failed = Vec::new();
    let mut total = 0;
    let mut check = |name: &str, ok: bool| {
        total += 1;
        if !ok {
            failed.push(name.to_string());
        }
    };
    let p = 0;
    let int = |props: &[usize]| Symbol::int(props.iter().copied().collect());
    let interval = |l, u| AtomBody::Interval(Interval::new(l, u));

    check("to_bounds (1,3]", to_bounds(interval(LowerBound::gt(1), UpperBound::le(3))) == Ok((LowerBound::gt(1), UpperBound::le(3))));
    check("to_bounds [0,inf)", to_bounds(AtomBody::Interval(Interval::any())) == Ok((LowerBound::ge(0), UpperBound::INFINITY)));
    check("to_bounds [2,2]", to_bounds(interval(LowerBound::ge(2), UpperBound::le(2))) == Ok((LowerBound::ge(2), UpperBound::le(2))));
    check("to_bounds NULL", to_bounds(AtomBody::Null).is_err());

    let t = BoundTable {
        lowers: vec![LowerBound::ge(1), LowerBound::gt(2)],
        uppers: vec![UpperBound::lt(5)],
    };
    let z = NewClocks { lower: vec![10, 11], upper: vec![20] };
    let lower_first = ObligationSet::from_obligations(
        &t,
        &[Obligation::Lower(LowerBound::gt(2)), Obligation::Upper(Flag::First, UpperBound::lt(5))],
    );
    let live_lower = ObligationSet::from_obligations(
        &t,
        &[Obligation::Upper(Flag::Live, UpperBound::lt(5)), Obligation::Lower(LowerBound::ge(1))],
    );
    check("live(∅)", live(ObligationSet::EMPTY).is_empty());
    check("live drops lower and first", live(lower_first).is_empty());
    check(
        "live keeps live uppers",
        live(live_lower).obligations(&t) == vec![Obligation::Upper(Flag::Live, UpperBound::lt(5))],
    );

    check("con(∅, a) = TRUE", con(ObligationSet::EMPTY, int(&[p]), p, &t, &z).is_empty());
    check("con without p = TRUE", con(lower_first, int(&[]), p, &t, &z).is_empty());
    check(
        "con with p",
        con(lower_first, int(&[p]), p, &t, &z)
            == vec![Atom::lower(11, LowerBound::gt(2)), Atom::upper(20, UpperBound::lt(5))],
    );

    let t13 = BoundTable { lowers: vec![LowerBound::gt(1)], uppers: vec![UpperBound::lt(3)] };
    let pred13 = t13.prediction(interval(LowerBound::gt(1), UpperBound::lt(3)));
    let null = abs_step(ObligationSet::EMPTY, CheckSet::new(false, false, true), int(&[]), Prediction::Null, p, None);
    check(
        "abs_step NULL keeps p_inf and clears eventuality",
        null.is_some_and(|o| o.next.is_empty() && o.reset_lower.is_none() && o.reset_upper.is_none() && o.next_pinf && !o.next_ev),
    );
    let fresh = abs_step(ObligationSet::EMPTY, CheckSet::new(false, true, true), int(&[p]), pred13, p, None);
    check(
        "abs_step fresh prediction",
        fresh.is_some_and(|o| {
            o.reset_lower == Some(0)
                && o.reset_upper == Some(0)
                && o.next_ev
                && o.next.obligations(&t13)
                    == vec![Obligation::Lower(LowerBound::gt(1)), Obligation::Upper(Flag::First, UpperBound::lt(3))]
        }),
    );
    check(
        "abs_step eventuality mismatch",
        abs_step(ObligationSet::EMPTY, CheckSet::new(false, false, true), int(&[]), pred13, p, None).is_none(),
    );

    // lower bounds always restart; upper bounds restart only when absent or
    // just discharged, never while live
    let pending = ObligationSet::EMPTY.with_lower(0).with_upper(0, Flag::First);
    let k = CheckSet::new(false, true, true);
    check(
        "reset: lower replaces, pending first upper kept",
        abs_step(pending, k, int(&[]), pred13, p, None)
            .is_some_and(|o| o.reset_lower == Some(0) && o.reset_upper.is_none() && o.next == pending),
    );
    check(
        "reset: discharged first upper restarts",
        abs_step(pending, k, int(&[p]), pred13, p, None)
            .is_some_and(|o| o.reset_upper == Some(0) && o.next.upper(0) == Some(Flag::First)),
    );
    let live_upper = ObligationSet::EMPTY.with_upper(0, Flag::Live);
    check(
        "reset: live upper never restarts",
        abs_step(live_upper, k, int(&[p]), pred13, p, None)
            .is_some_and(|o| o.reset_upper.is_none() && o.next.upper(0) == Some(Flag::Live)),
    );
    check(
        "NULL without p needs only live obligations",
        abs_step(ObligationSet::EMPTY.with_lower(0), CheckSet::new(false, false, false), int(&[]), Prediction::Null, p, None)
            .is_none(),
    );
    check(
        "tag mismatch",
        abs_step(ObligationSet::EMPTY, CheckSet::new(true, false, true), int(&[]), Prediction::Null, p, None).is_none(),
    );

    if failed.is_empty() {
        outcome(true, format!("{total} worked examples reproduced"))
    } else {
        outcome(false, format!("failed: {}", failed.join("; ")))
    }
}

fn word_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let clocks = all_clocks(2);
    let mut disagreements = Vec::new();
    let mut positions = 0usize;
    for probe in 0..WORD_PROBES {
        let w = random_word(&mut rng, 20, 2);
        let tg = tags(&w);
        let partner = stack_scan_matching(&tg);
        let chains = map_chains(&tg);
        for i in 0..w.len() {
            positions += 1;
            if tg[i] == Tag::Call && w.matching_return(i).ok() != Some(partner[i]) {
                disagreements.push(format!("word {probe} matching_return({i})"));
            }
            if w.abstract_successor(i).ok() != Some(successor_oracle(&tg, &partner, i)) {
                disagreements.push(format!("word {probe} abstract_successor({i})"));
            }
            let chain = common::chain_of(&chains, i);
            if w.map_of(i).map(|m| m.positions).as_ref().ok() != Some(chain) {
                disagreements.push(format!("word {probe} map_of({i})"));
            }
            for &c in &clocks {
                if w.event_clock_value(i, c).ok() != Some(event_value_oracle(&w, &chains, i, c)) {
                    disagreements.push(format!("word {probe} {}({i})", c.kind.as_str()));
                }
            }
        }
    }
    let n = disagreements.len();
    let mut detail = format!("{n} disagreements over {WORD_PROBES} words, {positions} positions");
    if n > 0 {
        detail += &format!(" (first: {})", disagreements[..n.min(3)].join(", "));
    }
    outcome(n == 0, detail)
}

fn random_interval<R: Rng>(rng: &mut R, k: u32) -> Interval {
    loop {
        let lower = if rng.gen_bool(0.5) { LowerBound::gt(rng.gen_range(0..=k)) } else { LowerBound::ge(rng.gen_range(0..=k)) };
        let upper = match rng.gen_range(0..3) {
            0 => UpperBound::INFINITY,
            1 => UpperBound::lt(rng.gen_range(0..=k)),
            _ => UpperBound::le(rng.gen_range(0..=k)),
        };
        let i = Interval::new(lower, upper);
        if !i.is_empty() {
            return i;
        }
    }
}

fn random_value<R: Rng>(rng: &mut R, k: u32) -> Rational {
    Rational::new(rng.gen_range(0..=(4 * k as i64 + 12)), rng.gen_range(1..=4))
}

// guards over normal clocks agree on a configuration and its truncation
fn truncation_probes() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a11);
    for probe in 0..ENGINE_PROBES {
        let n = rng.gen_range(1..=4u32);
        let guard: Vec<Atom> = (0..rng.gen_range(1..=4))
            .map(|_| Atom::interval(rng.gen_range(0..n), random_interval(&mut rng, 3)))
            .collect();
        let k = guard
            .iter()
            .map(|a| match a.body {
                AtomBody::Interval(i) => i.lower.value.max(i.upper.value.unwrap_or(0)),
                AtomBody::Null => 0,
            })
            .max()
            .unwrap_or(0);
        let c = Configuration {
            state: 0,
            stack: vec![],
            valuation: (0..n).map(|x| (x, random_value(&mut rng, k))).collect(),
            time: Rational::from_integer(0),
        };
        let none = BTreeMap::new();
        let full = c.satisfies(&guard, &none).map_err(|e| e.to_string())?;
        let cut = c.truncate(k).satisfies(&guard, &none).map_err(|e| e.to_string())?;
        if full != cut {
            return Err(format!("probe {probe}: {guard:?} on {:?}", c.valuation));
        }
    }
    Ok(ENGINE_PROBES)
}

// one period copy leaves the stack as it found it, whatever lies below
fn stack_neutrality_probes() -> Result<usize, String> {
    let cfg = GenConfig::mixed();
    let mut rng = ChaCha8Rng::seed_from_u64(0x57ac);
    let mut live_runs = 0;
    for probe in 0..ENGINE_PROBES {
        let a = gen_automaton(&cfg, &mut rng);
        let period = gen_up_word(&cfg, a.props.len(), &mut rng).period().clone();
        let event_clocks: Vec<_> = a.event_clocks().collect();
        let columns: Vec<Vec<Option<Rational>>> =
            event_clocks.iter().map(|&(_, e)| period.event_values(e)).collect();
        let syms = a.stack_symbols.len().max(1) as u32;
        let stack_a: Vec<u32> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..syms)).collect();
        let stack_b: Vec<u32> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..syms)).collect();
        let state = rng.gen_range(0..a.states.len() as u32);
        let valuation: BTreeMap<u32, Rational> =
            a.normal_clocks().map(|x| (x, random_value(&mut rng, 3))).collect();
        let start = period.time(0) - Rational::new(rng.gen_range(0..=4), 2);
        let run = |stack: &Vec<u32>| -> Result<Vec<Configuration>, String> {
            let mut set = vec![Configuration { state, stack: stack.clone(), valuation: valuation.clone(), time: start }];
            for i in 0..period.len() {
                let events = event_clocks.iter().zip(&columns).map(|(&(id, _), col)| (id, col[i])).collect();
                let mut next = Vec::new();
                for c in &set {
                    next.extend(step(&a, c, period.symbol(i), period.time(i), &events).map_err(|e| e.to_string())?);
                }
                next.sort();
                next.dedup();
                set = next;
            }
            Ok(set)
        };
        let (out_a, out_b) = (run(&stack_a)?, run(&stack_b)?);
        if out_a.iter().any(|c| c.stack != stack_a) || out_b.iter().any(|c| c.stack != stack_b) {
            return Err(format!("probe {probe}: stack changed across a period copy"));
        }
        let strip = |set: &[Configuration]| -> Vec<(u32, BTreeMap<u32, Rational>)> {
            let mut v: Vec<_> = set.iter().map(|c| (c.state, c.valuation.clone())).collect();
            v.sort();
            v
        };
        if strip(&out_a) != strip(&out_b) {
            return Err(format!("probe {probe}: result depends on the stack below"));
        }
        live_runs += usize::from(!out_a.is_empty());
    }
    Ok(live_runs)
}

fn engine_soundness(runs: &Runs) -> Outcome {
    let trunc = truncation_probes();
    let neutral = stack_neutrality_probes();
    let errors: usize = runs.reports.iter().map(|r| r.errors.len()).sum();
    let cases: usize = runs.reports.iter().map(|r| r.cases).sum();
    let detail = format!(
        "truncation {}, stack neutrality {}, {cases} difftest cases finished with {errors} errors",
        match &trunc {
            Ok(n) => format!("{n} probes agree"),
            Err(e) => e.clone(),
        },
        match &neutral {
            Ok(live) => format!("{ENGINE_PROBES} probes hold ({live} with live runs)"),
            Err(e) => e.clone(),
        },
    );
    outcome(trunc.is_ok() && neutral.is_ok() && errors == 0, detail)
}

fn mutation_sensitivity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in Mutation::ALL {
        let cfg = GenConfig {
            cases: CASES,
            words_per_case: WORDS,
            mutation: Some(m),
            shrink: false,
            ..GenConfig::for_kind(EventKind::AbsPredictor)
        };
        let r = difftest(&cfg);
        ok &= !r.mismatches.is_empty();
        parts.push(format!("{m} {}", r.mismatches.len()));
    }
    outcome(ok, format!("mismatches per mutation: {}", parts.join(", ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = Runs::new();
    let results = [
        ("1 translation equivalence", equivalence(&runs)),
        ("2 size bounds", size_bounds(&runs)),
        ("3 max-constant preservation", max_constant(&runs)),
        ("4 rule-level examples", rule_suite()),
        ("5 word-structure oracles", word_oracles()),
        ("6 engine soundness", engine_soundness(&runs)),
        ("7 mutation sensitivity", mutation_sensitivity()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed in {:.0?}", results.len() - failed, start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

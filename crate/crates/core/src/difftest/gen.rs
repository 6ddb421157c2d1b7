//! Seeded random automata and ultimately periodic words.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    Atom, Automaton, Clock, Interval, LowerBound, StackAction, StackTop, Transition, UpperBound,
};
use crate::words::{EventKind, PropSet, Symbol, Tag, TimedLetter, TimedNestedWord, UpWord};
use crate::translate::reachable_part;
use crate::Rational;

use super::GenConfig;

const ATOM_RATE: f64 = 0.3;
const NULL_RATE: f64 = 0.2;
const NORMAL_ATOM_RATE: f64 = 0.3;
const RESET_RATE: f64 = 0.3;
const SYMBOL_RATE: f64 = 0.95;
const SECOND_TRANSITION_RATE: f64 = 0.5;
const POP_TOP_RATE: f64 = 0.9;
const RICH_PERIOD_RATE: f64 = 0.5;

fn clock_prefix(kind: EventKind) -> &'static str {
    match kind {
        EventKind::GlobalRecorder => "xg",
        EventKind::GlobalPredictor => "yg",
        EventKind::AbsRecorder => "xa",
        EventKind::AbsPredictor => "ya",
    }
}

fn random_interval<R: Rng>(rng: &mut R, k: u32) -> Interval {
    loop {
        let lower = match rng.gen_range(0..3) {
            0 => LowerBound::ZERO,
            1 => LowerBound::gt(rng.gen_range(0..k)),
            _ => LowerBound::ge(rng.gen_range(1..=k)),
        };
        let upper = match rng.gen_range(0..3) {
            0 => UpperBound::INFINITY,
            1 => UpperBound::lt(rng.gen_range(1..=k)),
            _ => UpperBound::le(rng.gen_range(0..=k)),
        };
        let i = Interval::new(lower, upper);
        if !i.is_empty() && !(lower.is_trivial() && upper.is_trivial()) {
            return i;
        }
    }
}

/// A random well-formed automaton within the bounds of `cfg`, restricted
/// to its reachable part.
///
/// Each clock draws its intervals from a palette of at most two, which
/// keeps the number of distinct bounds per clock small.
pub fn gen_automaton<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Automaton {
    let n_states = rng.gen_range(1..=cfg.max_states);
    let n_props = rng.gen_range(1..=cfg.max_props);
    let n_syms = rng.gen_range(1..=2usize);
    let k = cfg.max_constant;

    let mut clocks = Vec::new();
    for i in 0..cfg.event_clocks {
        let kind = *cfg.clock_menu.choose(rng).expect("non-empty clock menu");
        let prop = rng.gen_range(0..n_props);
        clocks.push(Clock::event(format!("{}{i}", clock_prefix(kind)), kind, prop));
    }
    if rng.gen_bool(0.5) {
        clocks.push(Clock::normal("x"));
    }
    let palettes: Vec<Vec<Interval>> = clocks
        .iter()
        .map(|_| (0..rng.gen_range(1..=2)).map(|_| random_interval(rng, k)).collect())
        .collect();

    let mut transitions = Vec::new();
    for source in 0..n_states as u32 {
        for tag in Tag::ALL {
            for bits in 0..1u64 << n_props {
                if !rng.gen_bool(SYMBOL_RATE) {
                    continue;
                }
                let symbol = Symbol::new(tag, PropSet::from_bits(bits));
                let actions: Vec<StackAction> = match tag {
                    Tag::Int => vec![StackAction::Internal],
                    Tag::Call => vec![StackAction::Push(rng.gen_range(0..n_syms as u32))],
                    Tag::Ret => {
                        let mut tops: Vec<StackAction> = std::iter::once(StackTop::Bottom)
                            .chain((0..n_syms as u32).map(StackTop::Symbol))
                            .filter(|_| rng.gen_bool(POP_TOP_RATE))
                            .map(StackAction::Pop)
                            .collect();
                        if tops.is_empty() {
                            tops.push(StackAction::Pop(StackTop::Bottom));
                        }
                        tops
                    }
                };
                for action in actions {
                    let copies = if rng.gen_bool(SECOND_TRANSITION_RATE) { 2 } else { 1 };
                    for _ in 0..copies {
                        transitions.push(random_transition(
                            rng, &clocks, &palettes, source, n_states, symbol, action,
                        ));
                    }
                }
            }
        }
    }

    let components = rng.gen_range(1..=2);
    let acceptance = (0..components)
        .map(|_| {
            let mut f: Vec<u32> = (0..n_states as u32).filter(|_| rng.gen_bool(0.5)).collect();
            if f.is_empty() {
                f.push(rng.gen_range(0..n_states as u32));
            }
            f
        })
        .collect();

    reachable_part(&Automaton {
        props: (0..n_props).map(|i| format!("p{i}")).collect(),
        states: (0..n_states).map(|i| format!("q{i}")).collect(),
        initial: vec![0],
        clocks,
        stack_symbols: (0..n_syms).map(|i| format!("g{i}")).collect(),
        transitions,
        acceptance,
    })
}

#[allow(clippy::too_many_arguments)]
fn random_transition<R: Rng>(
    rng: &mut R,
    clocks: &[Clock],
    palettes: &[Vec<Interval>],
    source: u32,
    n_states: usize,
    symbol: Symbol,
    action: StackAction,
) -> Transition {
    let mut guard = Vec::new();
    let mut resets = Vec::new();
    for (id, c) in clocks.iter().enumerate() {
        let id = id as u32;
        let rate = if c.is_normal() { NORMAL_ATOM_RATE } else { ATOM_RATE };
        // an unmatched return starts a MAP, so an abstract recorder is NULL there
        let null_only = action == StackAction::Pop(StackTop::Bottom)
            && c.event_clock().is_some_and(|e| e.kind == EventKind::AbsRecorder);
        if rng.gen_bool(rate) {
            if null_only || (!c.is_normal() && rng.gen_bool(NULL_RATE)) {
                guard.push(Atom::null(id));
            } else {
                guard.push(Atom::interval(id, *palettes[id as usize].choose(rng).expect("palette")));
            }
        }
        if c.is_normal() && rng.gen_bool(RESET_RATE) {
            resets.push(id);
        }
    }
    Transition {
        source,
        symbol,
        guard,
        resets,
        action,
        target: rng.gen_range(0..n_states as u32),
    }
}

fn random_props<R: Rng>(rng: &mut R, n_props: usize) -> PropSet {
    PropSet::from_bits(rng.gen_range(0..1u64 << n_props))
}

// gaps are multiples of 1/2 up to `max_constant + 1`
fn random_gap<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Rational {
    Rational::new(rng.gen_range(0..=2 * (cfg.max_constant as i64 + 1)), 2)
}

// a well-matched tag sequence of length `n`
fn dyck_tags<R: Rng>(rng: &mut R, n: usize) -> Vec<Tag> {
    let mut tags = Vec::with_capacity(n);
    let mut open = 0usize;
    for i in 0..n {
        let left = n - i;
        let mut choices = Vec::with_capacity(3);
        if left > open {
            choices.push(Tag::Int);
        }
        if left >= open + 2 {
            choices.push(Tag::Call);
        }
        if open > 0 {
            choices.push(Tag::Ret);
        }
        let tag = *choices.choose(rng).expect("a tag always fits");
        match tag {
            Tag::Call => open += 1,
            Tag::Ret => open -= 1,
            Tag::Int => {}
        }
        tags.push(tag);
    }
    tags
}

/// A random ultimately periodic word over `n_props` propositions.
///
/// The prefix may hold unmatched calls and returns. The period is
/// well-matched and, half of the time, carries no proposition at all.
pub fn gen_up_word<R: Rng>(cfg: &GenConfig, n_props: usize, rng: &mut R) -> UpWord {
    let mut t = Rational::from_integer(0);
    let mut prefix = Vec::new();
    for _ in 0..rng.gen_range(0..=cfg.prefix_len) {
        t += random_gap(rng, cfg);
        let tag = *Tag::ALL.choose(rng).expect("tags");
        prefix.push(TimedLetter { symbol: Symbol::new(tag, random_props(rng, n_props)), time: t });
    }
    let rich = rng.gen_bool(RICH_PERIOD_RATE);
    let mut period = Vec::new();
    let start = t + random_gap(rng, cfg);
    t = start;
    let len = rng.gen_range(1..=cfg.period_len);
    for (i, tag) in dyck_tags(rng, len).into_iter().enumerate() {
        if i > 0 {
            t += random_gap(rng, cfg);
        }
        let props = if rich { random_props(rng, n_props) } else { PropSet::EMPTY };
        period.push(TimedLetter { symbol: Symbol::new(tag, props), time: t });
    }
    let mut closing = random_gap(rng, cfg);
    if t == start && closing == Rational::from_integer(0) {
        closing = Rational::new(1, 2);
    }
    UpWord::new(
        TimedNestedWord::new(prefix).expect("non-decreasing prefix"),
        TimedNestedWord::new(period).expect("non-decreasing period"),
        t - start + closing,
    )
    .expect("generated word is well formed")
}

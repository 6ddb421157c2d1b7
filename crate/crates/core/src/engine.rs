//! Runs of nested VPTA on timed nested words, and Büchi acceptance of
//! ultimately periodic words.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::model::{
    validate, Atom, AtomBody, Automaton, ClockId, StackAction, StackSymId, StackTop, StateId,
    Violation,
};
use crate::words::{EventClock, Symbol, TimedNestedWord, UpWord, WordError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("automaton is not well formed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("no value supplied for event clock #{0}")]
    MissingEventValue(ClockId),
    #[error("time goes backwards: {to} after {from}")]
    TimeReversal { from: Rational, to: Rational },
    #[error("stack at a period boundary differs from the stack after the prefix")]
    StackMismatch,
    #[error("time denominators too large to represent clock values")]
    Overflow,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A configuration with exact clock values, used for step-by-step runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    /// Stack contents above the bottom marker, bottom first.
    pub stack: Vec<StackSymId>,
    /// Values of the normal clocks.
    pub valuation: BTreeMap<ClockId, Rational>,
    /// Timestamp of the last letter read.
    pub time: Rational,
}

/// A clock value cut off at `K_A + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Truncated {
    pub value: Rational,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedConfiguration {
    pub state: StateId,
    pub stack: Vec<StackSymId>,
    pub valuation: BTreeMap<ClockId, Truncated>,
}

fn atom_holds(atom: &Atom, value: Option<Rational>) -> bool {
    atom.holds(value)
}

impl Configuration {
    pub fn initial(a: &Automaton) -> Vec<Configuration> {
        let valuation: BTreeMap<ClockId, Rational> =
            a.normal_clocks().map(|c| (c, Rational::zero())).collect();
        a.initial
            .iter()
            .map(|&state| Configuration {
                state,
                stack: Vec::new(),
                valuation: valuation.clone(),
                time: Rational::zero(),
            })
            .collect()
    }

    /// Whether `guard` holds; event-clock atoms read `events`.
    pub fn satisfies(
        &self,
        guard: &[Atom],
        events: &BTreeMap<ClockId, Option<Rational>>,
    ) -> Result<bool, EngineError> {
        for atom in guard {
            let value = match self.valuation.get(&atom.clock) {
                Some(&v) => Some(v),
                None => *events.get(&atom.clock).ok_or(EngineError::MissingEventValue(atom.clock))?,
            };
            if !atom_holds(atom, value) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn truncate(&self, max_constant: u32) -> TruncatedConfiguration {
        let cap = Rational::from_integer(max_constant as i64 + 1);
        TruncatedConfiguration {
            state: self.state,
            stack: self.stack.clone(),
            valuation: self
                .valuation
                .iter()
                .map(|(&c, &v)| {
                    let t = if v > cap {
                        Truncated { value: cap, truncated: true }
                    } else {
                        Truncated { value: v, truncated: false }
                    };
                    (c, t)
                })
                .collect(),
        }
    }
}

impl TruncatedConfiguration {
    pub fn satisfies(
        &self,
        guard: &[Atom],
        events: &BTreeMap<ClockId, Option<Rational>>,
    ) -> Result<bool, EngineError> {
        for atom in guard {
            let value = match self.valuation.get(&atom.clock) {
                Some(t) => Some(t.value),
                None => *events.get(&atom.clock).ok_or(EngineError::MissingEventValue(atom.clock))?,
            };
            if !atom_holds(atom, value) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Successors of `c` on reading `a` at time `t`.
///
/// `events` holds the value of every event clock at this position.
pub fn step(
    a: &Automaton,
    c: &Configuration,
    symbol: Symbol,
    t: Rational,
    events: &BTreeMap<ClockId, Option<Rational>>,
) -> Result<Vec<Configuration>, EngineError> {
    if t < c.time {
        return Err(EngineError::TimeReversal { from: c.time, to: t });
    }
    let elapsed = t - c.time;
    let mut advanced = c.clone();
    for v in advanced.valuation.values_mut() {
        *v += elapsed;
    }
    advanced.time = t;
    let mut out = Vec::new();
    for tr in a.transitions.iter().filter(|tr| tr.source == c.state && tr.symbol == symbol) {
        let stack_ok = match tr.action {
            StackAction::Pop(StackTop::Bottom) => advanced.stack.is_empty(),
            StackAction::Pop(StackTop::Symbol(g)) => advanced.stack.last() == Some(&g),
            _ => true,
        };
        if !stack_ok || !advanced.satisfies(&tr.guard, events)? {
            continue;
        }
        let mut next = advanced.clone();
        next.state = tr.target;
        for r in &tr.resets {
            if let Some(v) = next.valuation.get_mut(r) {
                *v = Rational::zero();
            }
        }
        match tr.action {
            StackAction::Push(g) => next.stack.push(g),
            StackAction::Pop(StackTop::Symbol(_)) => {
                next.stack.pop();
            }
            _ => {}
        }
        out.push(next);
    }
    Ok(out)
}

/// The configuration sets before and after each letter of the finite word
/// `w`, starting with the initial configurations.
///
/// Event clocks take their values on `w` itself, so predictors see only
/// the letters of `w`.
pub fn trace(a: &Automaton, w: &TimedNestedWord) -> Result<Vec<Vec<Configuration>>, EngineError> {
    let event_clocks: Vec<(ClockId, EventClock)> = a.event_clocks().collect();
    let columns: Vec<Vec<Option<Rational>>> =
        event_clocks.iter().map(|&(_, e)| w.event_values(e)).collect();
    let mut out = vec![Configuration::initial(a)];
    for i in 0..w.len() {
        let events: BTreeMap<ClockId, Option<Rational>> =
            event_clocks.iter().zip(&columns).map(|(&(id, _), col)| (id, col[i])).collect();
        let mut next = HashSet::new();
        for c in out.last().expect("initial set") {
            next.extend(step(a, c, w.symbol(i), w.time(i), &events)?);
        }
        let mut next: Vec<Configuration> = next.into_iter().collect();
        next.sort();
        out.push(next);
    }
    Ok(out)
}

/// All configurations reached after reading the finite word `w`.
pub fn run_prefix(a: &Automaton, w: &TimedNestedWord) -> Result<Vec<Configuration>, EngineError> {
    Ok(trace(a, w)?.pop().expect("initial set"))
}

// Clock values in ticks of `1/scale` time units, cut off at `cap`.
struct Compiled {
    by_state_symbol: HashMap<(StateId, Symbol), Vec<CompiledTransition>>,
    components: Vec<Vec<bool>>,
    clocks: usize,
}

enum Check {
    Normal { clock: usize, lower: (bool, u64), upper: Option<(bool, u64)> },
    Event { column: usize, atom: Atom },
}

struct CompiledTransition {
    checks: Vec<Check>,
    resets: Vec<usize>,
    action: StackAction,
    target: StateId,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    state: StateId,
    vals: Box<[u64]>,
    stack: Vec<StackSymId>,
}

impl Compiled {
    fn new(a: &Automaton, scale: u64) -> Self {
        let mut normal_index = vec![None; a.clocks.len()];
        let mut event_column = vec![None; a.clocks.len()];
        let (mut n, mut e) = (0, 0);
        for (i, c) in a.clocks.iter().enumerate() {
            if c.is_normal() {
                normal_index[i] = Some(n);
                n += 1;
            } else {
                event_column[i] = Some(e);
                e += 1;
            }
        }
        let mut by_state_symbol: HashMap<(StateId, Symbol), Vec<CompiledTransition>> = HashMap::new();
        for t in &a.transitions {
            let checks = t
                .guard
                .iter()
                .map(|atom| match (normal_index[atom.clock as usize], atom.body) {
                    (Some(clock), AtomBody::Interval(i)) => Check::Normal {
                        clock,
                        lower: (i.lower.strict, i.lower.value as u64 * scale),
                        upper: i.upper.value.map(|u| (i.upper.strict, u as u64 * scale)),
                    },
                    (Some(_), AtomBody::Null) => unreachable!("validated: NULL only on event clocks"),
                    (None, _) => Check::Event {
                        column: event_column[atom.clock as usize].expect("event clock"),
                        atom: *atom,
                    },
                })
                .collect();
            let resets = t.resets.iter().filter_map(|&r| normal_index[r as usize]).collect();
            by_state_symbol.entry((t.source, t.symbol)).or_default().push(CompiledTransition {
                checks,
                resets,
                action: t.action,
                target: t.target,
            });
        }
        let family: Vec<Vec<StateId>> = if a.acceptance.is_empty() {
            vec![(0..a.states.len() as StateId).collect()]
        } else {
            a.acceptance.clone()
        };
        let components = family
            .iter()
            .map(|f| {
                let mut m = vec![false; a.states.len()];
                for &q in f {
                    m[q as usize] = true;
                }
                m
            })
            .collect();
        Compiled { by_state_symbol, components, clocks: n }
    }

    fn successors(
        &self,
        c: &Config,
        symbol: Symbol,
        gap: u64,
        cap: u64,
        events: &[Option<Rational>],
        out: &mut Vec<Config>,
    ) {
        let Some(ts) = self.by_state_symbol.get(&(c.state, symbol)) else {
            return;
        };
        let vals: Box<[u64]> = c.vals.iter().map(|&v| (v + gap).min(cap)).collect();
        'next: for t in ts {
            match t.action {
                StackAction::Pop(StackTop::Bottom) if !c.stack.is_empty() => continue,
                StackAction::Pop(StackTop::Symbol(g)) if c.stack.last() != Some(&g) => continue,
                _ => {}
            }
            for check in &t.checks {
                let ok = match *check {
                    Check::Normal { clock, lower, upper } => {
                        let v = vals[clock];
                        let lo = if lower.0 { v > lower.1 } else { v >= lower.1 };
                        let up = match upper {
                            None => true,
                            Some((true, u)) => v < u,
                            Some((false, u)) => v <= u,
                        };
                        lo && up
                    }
                    Check::Event { column, ref atom } => atom.holds(events[column]),
                };
                if !ok {
                    continue 'next;
                }
            }
            let mut next_vals = vals.clone();
            for &r in &t.resets {
                next_vals[r] = 0;
            }
            let mut stack = c.stack.clone();
            match t.action {
                StackAction::Push(g) => stack.push(g),
                StackAction::Pop(StackTop::Symbol(_)) => {
                    stack.pop();
                }
                _ => {}
            }
            out.push(Config { state: t.target, vals: next_vals, stack });
        }
    }
}

/// Whether `a` has a run on the infinite word `w` visiting every acceptance
/// component infinitely often. An empty acceptance family accepts every
/// infinite run.
#[allow(clippy::needless_range_loop)]
pub fn accepts(a: &Automaton, w: &UpWord) -> Result<bool, EngineError> {
    let violations = validate(a);
    if !violations.is_empty() {
        return Err(EngineError::Invalid(violations));
    }
    let k = a.max_constant();
    let clocks: Vec<EventClock> = a.event_clocks().map(|(_, e)| e).collect();
    let trace = w.stabilized(&clocks, Rational::from_integer(k as i64 + 1))?;

    let mut scale: i64 = 1;
    for g in &trace.gaps {
        scale = scale.lcm(g.denom());
    }
    let to_ticks = |g: Rational| -> Result<u64, EngineError> {
        (g * Rational::from_integer(scale))
            .to_integer()
            .to_u64()
            .ok_or(EngineError::Overflow)
    };
    let gaps: Vec<u64> = trace.gaps.iter().map(|&g| to_ticks(g)).collect::<Result<_, _>>()?;
    let cap = (k as u64 + 1).checked_mul(scale as u64).ok_or(EngineError::Overflow)?;
    let compiled = Compiled::new(a, scale as u64);

    // prefix and transient copies
    let mut current: HashSet<Config> = a
        .initial
        .iter()
        .map(|&state| Config { state, vals: vec![0; compiled.clocks].into(), stack: Vec::new() })
        .collect();
    let mut buf = Vec::new();
    for i in 0..trace.loop_start {
        let mut next = HashSet::new();
        for c in &current {
            buf.clear();
            compiled.successors(c, trace.letters[i], gaps[i], cap, &trace.values[i], &mut buf);
            next.extend(buf.drain(..));
        }
        current = next;
        if current.is_empty() {
            return Ok(false);
        }
    }

    // boundary graph of the repeating copy
    let m = compiled.components.len();
    let start = trace.loop_start;
    let n = trace.period_len;
    let mut graph: DiGraph<(), bool> = DiGraph::new();
    let mut nodes: HashMap<(Config, u8), NodeIndex> = HashMap::new();
    let mut work: Vec<(Config, u8)> = Vec::new();
    for c in current {
        let key = (c, 0u8);
        nodes.insert(key.clone(), graph.add_node(()));
        work.push(key);
    }
    while let Some(node) = work.pop() {
        let from = nodes[&node];
        let mut layer: HashMap<(Config, u8), bool> = HashMap::new();
        layer.insert(node.clone(), false);
        for i in start..start + n {
            let mut next: HashMap<(Config, u8), bool> = HashMap::new();
            for ((c, counter), acc) in &layer {
                buf.clear();
                compiled.successors(c, trace.letters[i], gaps[i], cap, &trace.values[i], &mut buf);
                for s in buf.drain(..) {
                    let mut counter = *counter as usize;
                    let mut acc = *acc;
                    if compiled.components[counter][s.state as usize] {
                        counter += 1;
                        if counter == m {
                            counter = 0;
                            acc = true;
                        }
                    }
                    let e = next.entry((s, counter as u8)).or_insert(false);
                    *e |= acc;
                }
            }
            layer = next;
        }
        for ((c, counter), acc) in layer {
            if c.stack != node.0.stack {
                return Err(EngineError::StackMismatch);
            }
            let key = (c, counter);
            let to = match nodes.get(&key) {
                Some(&ix) => ix,
                None => {
                    let ix = graph.add_node(());
                    nodes.insert(key.clone(), ix);
                    work.push(key);
                    ix
                }
            };
            graph.add_edge(from, to, acc);
        }
    }
    let mut scc_of = vec![usize::MAX; graph.node_count()];
    for (i, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for ix in scc {
            scc_of[ix.index()] = i;
        }
    }
    Ok(graph.edge_indices().any(|e| {
        let (u, v) = graph.edge_endpoints(e).expect("edge");
        graph[e] && scc_of[u.index()] == scc_of[v.index()]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Clock, Interval, LowerBound, Transition, UpperBound};
    use crate::words::{EventKind, PropSet, Tag, TimedLetter};

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn word(letters: &[(Tag, &[usize], i64)]) -> TimedNestedWord {
        TimedNestedWord::new(
            letters.iter()
                .map(|&(tag, props, t)| TimedLetter {
                    symbol: Symbol::new(tag, props.iter().copied().collect()),
                    time: r(t),
                })
                .collect(),
        )
        .unwrap()
    }

    fn universal() -> Automaton {
        let mut transitions = Vec::new();
        for props in [PropSet::EMPTY, PropSet::singleton(0)] {
            for (sym, action) in [
                (Symbol::int(props), StackAction::Internal),
                (Symbol::call(props), StackAction::Push(0)),
                (Symbol::ret(props), StackAction::Pop(StackTop::Symbol(0))),
                (Symbol::ret(props), StackAction::Pop(StackTop::Bottom)),
            ] {
                transitions.push(Transition {
                    source: 0,
                    symbol: sym,
                    guard: vec![],
                    resets: vec![],
                    action,
                    target: 0,
                });
            }
        }
        Automaton {
            props: vec!["p".into()],
            states: vec!["q".into()],
            initial: vec![0],
            clocks: vec![],
            stack_symbols: vec!["g".into()],
            transitions,
            acceptance: vec![vec![0]],
        }
    }

    fn internal_loop(guard: Vec<Atom>, resets: Vec<ClockId>, clocks: Vec<Clock>) -> Automaton {
        Automaton {
            props: vec!["p".into()],
            states: vec!["q".into()],
            initial: vec![0],
            clocks,
            stack_symbols: vec![],
            transitions: vec![Transition {
                source: 0,
                symbol: Symbol::int(PropSet::EMPTY),
                guard,
                resets,
                action: StackAction::Internal,
                target: 0,
            }],
            acceptance: vec![vec![0]],
        }
    }

    #[test]
    fn no_matching_transition_gives_nothing() {
        let a = internal_loop(vec![], vec![], vec![]);
        let c = &Configuration::initial(&a)[0];
        let out = step(&a, c, Symbol::call(PropSet::EMPTY), r(0), &BTreeMap::new()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn guard_free_self_loop_has_one_successor() {
        let a = internal_loop(vec![], vec![], vec![]);
        let c = &Configuration::initial(&a)[0];
        let out = step(&a, c, Symbol::int(PropSet::EMPTY), r(1), &BTreeMap::new()).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn elapsed_time_violates_upper_bound() {
        let z = Atom::interval(0, Interval::new(LowerBound::ZERO, UpperBound::lt(2)));
        let a = internal_loop(vec![z], vec![], vec![Clock::normal("z")]);
        let c = &Configuration::initial(&a)[0];
        assert!(step(&a, c, Symbol::int(PropSet::EMPTY), r(3), &BTreeMap::new()).unwrap().is_empty());
        assert_eq!(step(&a, c, Symbol::int(PropSet::EMPTY), r(1), &BTreeMap::new()).unwrap().len(), 1);
    }

    #[test]
    fn missing_event_value_is_an_error() {
        let y = Atom::interval(0, Interval::new(LowerBound::gt(1), UpperBound::INFINITY));
        let a = internal_loop(vec![y], vec![], vec![Clock::event("y", EventKind::GlobalPredictor, 0)]);
        let c = &Configuration::initial(&a)[0];
        assert_eq!(
            step(&a, c, Symbol::int(PropSet::EMPTY), r(0), &BTreeMap::new()),
            Err(EngineError::MissingEventValue(0))
        );
    }

    #[test]
    fn run_prefix_examples() {
        let a = internal_loop(vec![], vec![], vec![]);
        assert_eq!(run_prefix(&a, &TimedNestedWord::empty()).unwrap().len(), 1);
        let w = word(&[(Tag::Int, &[], 0), (Tag::Int, &[], 1)]);
        assert_eq!(run_prefix(&a, &w).unwrap().len(), 1);
        let mut two = a.clone();
        two.states.push("q'".into());
        two.transitions.push(Transition { target: 1, ..a.transitions[0].clone() });
        let out = run_prefix(&two, &word(&[(Tag::Int, &[], 0)])).unwrap();
        assert_eq!(out.len(), 2);
    }

    fn lasso(prefix: &[(Tag, &[usize], i64)], period: &[(Tag, &[usize], i64)], d: i64) -> UpWord {
        UpWord::new(word(prefix), word(period), r(d)).unwrap()
    }

    #[test]
    fn universal_automaton_accepts() {
        let w = lasso(
            &[(Tag::Ret, &[], 0), (Tag::Call, &[0], 1)],
            &[(Tag::Call, &[], 1), (Tag::Int, &[0], 2), (Tag::Ret, &[], 2)],
            2,
        );
        assert!(accepts(&universal(), &w).unwrap());
    }

    #[test]
    fn unreachable_component_rejects() {
        let mut a = universal();
        a.states.push("dead".into());
        a.acceptance = vec![vec![1]];
        let w = lasso(&[], &[(Tag::Int, &[], 0)], 1);
        assert!(!accepts(&a, &w).unwrap());
    }

    #[test]
    fn abstract_predictor_guard_against_next_p_on_the_map() {
        // every position predicts y^abs_p ∈ (0,2) on its MAP
        let y = Atom::interval(0, Interval::new(LowerBound::gt(0), UpperBound::lt(2)));
        let mut a = internal_loop(vec![y], vec![], vec![Clock::event("y", EventKind::AbsPredictor, 0)]);
        let mut with_p = a.transitions[0].clone();
        with_p.symbol = Symbol::int(PropSet::singleton(0));
        a.transitions.push(with_p);
        let far = lasso(&[], &[(Tag::Int, &[], 0), (Tag::Int, &[0], 3)], 3);
        assert!(!accepts(&a, &far).unwrap());
        let near = lasso(&[], &[(Tag::Int, &[], 0), (Tag::Int, &[0], 1)], 1);
        assert!(accepts(&a, &near).unwrap());
    }

    #[test]
    fn generalized_acceptance_needs_every_component() {
        // q0 -int-> q1 -int-> q0, components {q0} and {q1}
        let mut a = internal_loop(vec![], vec![], vec![]);
        a.states.push("q1".into());
        a.transitions[0].target = 1;
        a.transitions.push(Transition { source: 1, target: 0, ..a.transitions[0].clone() });
        a.acceptance = vec![vec![0], vec![1]];
        let w = lasso(&[], &[(Tag::Int, &[], 0)], 1);
        assert!(accepts(&a, &w).unwrap());
        // a self-loop on q0 alone never visits q1
        let mut b = internal_loop(vec![], vec![], vec![]);
        b.states.push("q1".into());
        b.acceptance = vec![vec![0], vec![1]];
        assert!(!accepts(&b, &w).unwrap());
    }
}

//! Nested visibly pushdown timed automata with normal and event clocks.

use std::collections::HashSet;
use std::fmt;

use crate::words::{EventClock, EventKind, Prop, Symbol, Tag};
use crate::Rational;

pub type StateId = u32;
pub type ClockId = u32;
pub type StackSymId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockKind {
    Normal,
    Event(EventClock),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clock {
    pub name: String,
    pub kind: ClockKind,
}

impl Clock {
    pub fn normal(name: impl Into<String>) -> Self {
        Clock { name: name.into(), kind: ClockKind::Normal }
    }

    pub fn event(name: impl Into<String>, kind: EventKind, prop: Prop) -> Self {
        Clock { name: name.into(), kind: ClockKind::Event(EventClock { kind, prop }) }
    }

    pub fn is_normal(&self) -> bool {
        self.kind == ClockKind::Normal
    }

    pub fn event_clock(&self) -> Option<EventClock> {
        match self.kind {
            ClockKind::Event(e) => Some(e),
            ClockKind::Normal => None,
        }
    }
}

/// Lower bound `≻ ℓ` with `≻ ∈ {>, ≥}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LowerBound {
    pub strict: bool,
    pub value: u32,
}

/// Upper bound `≺ u` with `≺ ∈ {<, ≤}`; `value == None` is `< ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpperBound {
    pub strict: bool,
    pub value: Option<u32>,
}

impl LowerBound {
    pub const ZERO: LowerBound = LowerBound { strict: false, value: 0 };

    pub fn gt(value: u32) -> Self {
        LowerBound { strict: true, value }
    }

    pub fn ge(value: u32) -> Self {
        LowerBound { strict: false, value }
    }

    pub fn holds(self, v: Rational) -> bool {
        let l = Rational::from_integer(self.value as i64);
        if self.strict {
            v > l
        } else {
            v >= l
        }
    }

    /// `≥ 0`, satisfied by every clock value.
    pub fn is_trivial(self) -> bool {
        self == LowerBound::ZERO
    }
}

impl UpperBound {
    pub const INFINITY: UpperBound = UpperBound { strict: true, value: None };

    pub fn lt(value: u32) -> Self {
        UpperBound { strict: true, value: Some(value) }
    }

    pub fn le(value: u32) -> Self {
        UpperBound { strict: false, value: Some(value) }
    }

    pub fn holds(self, v: Rational) -> bool {
        match self.value {
            None => true,
            Some(u) => {
                let u = Rational::from_integer(u as i64);
                if self.strict {
                    v < u
                } else {
                    v <= u
                }
            }
        }
    }

    /// `< ∞`, satisfied by every clock value.
    pub fn is_trivial(self) -> bool {
        self.value.is_none()
    }
}

impl fmt::Display for LowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.strict { ">" } else { ">=" }, self.value)
    }
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            None => f.write_str("<inf"),
            Some(u) => write!(f, "{}{}", if self.strict { "<" } else { "<=" }, u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lower: LowerBound,
    pub upper: UpperBound,
}

impl Interval {
    pub fn new(lower: LowerBound, upper: UpperBound) -> Self {
        Interval { lower, upper }
    }

    /// `[0, ∞)`.
    pub fn any() -> Self {
        Interval::new(LowerBound::ZERO, UpperBound::INFINITY)
    }

    pub fn contains(&self, v: Rational) -> bool {
        self.lower.holds(v) && self.upper.holds(v)
    }

    pub fn is_empty(&self) -> bool {
        match self.upper.value {
            None => false,
            Some(u) => {
                let l = self.lower.value;
                u < l || (u == l && (self.lower.strict || self.upper.strict))
            }
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lower = if (self.lower.value, self.lower.strict) >= (other.lower.value, other.lower.strict)
        {
            self.lower
        } else {
            other.lower
        };
        let upper = match (self.upper.value, other.upper.value) {
            (None, _) => other.upper,
            (_, None) => self.upper,
            (Some(a), Some(b)) if a != b => {
                if a < b {
                    self.upper
                } else {
                    other.upper
                }
            }
            _ => UpperBound { strict: self.upper.strict || other.upper.strict, ..self.upper },
        };
        Interval { lower, upper }
    }

    fn max_constant(&self) -> u32 {
        self.lower.value.max(self.upper.value.unwrap_or(0))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{},", if self.lower.strict { "(" } else { "[" }, self.lower.value)?;
        match self.upper.value {
            None => f.write_str("inf)"),
            Some(u) => write!(f, "{}{}", u, if self.upper.strict { ")" } else { "]" }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomBody {
    /// The event clock is undefined (no past/future occurrence).
    Null,
    Interval(Interval),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub clock: ClockId,
    pub body: AtomBody,
}

impl Atom {
    pub fn interval(clock: ClockId, interval: Interval) -> Self {
        Atom { clock, body: AtomBody::Interval(interval) }
    }

    pub fn null(clock: ClockId) -> Self {
        Atom { clock, body: AtomBody::Null }
    }

    pub fn lower(clock: ClockId, bound: LowerBound) -> Self {
        Atom::interval(clock, Interval::new(bound, UpperBound::INFINITY))
    }

    pub fn upper(clock: ClockId, bound: UpperBound) -> Self {
        Atom::interval(clock, Interval::new(LowerBound::ZERO, bound))
    }

    /// Truth value for a clock value (`None` = NULL).
    pub fn holds(&self, value: Option<Rational>) -> bool {
        match (self.body, value) {
            (AtomBody::Null, v) => v.is_none(),
            (AtomBody::Interval(_), None) => false,
            (AtomBody::Interval(i), Some(v)) => i.contains(v),
        }
    }
}

/// A conjunction of atomic constraints; the empty conjunction is `true`.
pub type ClockConstraint = Vec<Atom>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackTop {
    Bottom,
    Symbol(StackSymId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StackAction {
    Push(StackSymId),
    Pop(StackTop),
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub symbol: Symbol,
    pub guard: ClockConstraint,
    pub resets: Vec<ClockId>,
    pub action: StackAction,
    pub target: StateId,
}

/// A generalized Büchi nested VPTA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub props: Vec<String>,
    pub states: Vec<String>,
    pub initial: Vec<StateId>,
    pub clocks: Vec<Clock>,
    /// Stack alphabet without the bottom symbol.
    pub stack_symbols: Vec<String>,
    pub transitions: Vec<Transition>,
    /// Büchi components; an empty family accepts every infinite run.
    pub acceptance: Vec<Vec<StateId>>,
}

impl Automaton {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn clock_id(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|c| c.name == name).map(|i| i as ClockId)
    }

    pub fn event_clocks(&self) -> impl Iterator<Item = (ClockId, EventClock)> + '_ {
        self.clocks
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.event_clock().map(|e| (i as ClockId, e)))
    }

    pub fn normal_clocks(&self) -> impl Iterator<Item = ClockId> + '_ {
        self.clocks
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_normal())
            .map(|(i, _)| i as ClockId)
    }

    pub fn has_event_clocks(&self) -> bool {
        self.event_clocks().next().is_some()
    }

    /// Number of atomic constraints over event clocks.
    pub fn event_atom_count(&self) -> usize {
        self.transitions
            .iter()
            .flat_map(|t| &t.guard)
            .filter(|a| self.clocks[a.clock as usize].event_clock().is_some())
            .count()
    }

    pub fn max_constant(&self) -> u32 {
        max_constant(self)
    }
}

/// A broken well-formedness invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Stack action does not agree with the tag of the symbol read.
    VisiblyPushdown { transition: usize, tag: Tag },
    ResetOfEventClock { transition: usize, clock: ClockId },
    UnknownClock { transition: usize, clock: ClockId },
    UnknownState { context: String, state: StateId },
    UnknownStackSymbol { transition: usize, symbol: StackSymId },
    UnknownProp { context: String, prop: Prop },
    NullOnNormalClock { transition: usize, clock: ClockId },
    EmptyInterval { transition: usize, clock: ClockId },
    DuplicateName { what: &'static str, name: String },
    NoInitialState,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            VisiblyPushdown { transition, tag } => {
                write!(f, "transition {transition}: stack action does not match {tag} symbol")
            }
            ResetOfEventClock { transition, clock } => {
                write!(f, "transition {transition}: resets event clock {clock}")
            }
            UnknownClock { transition, clock } => {
                write!(f, "transition {transition}: unknown clock {clock}")
            }
            UnknownState { context, state } => write!(f, "{context}: unknown state {state}"),
            UnknownStackSymbol { transition, symbol } => {
                write!(f, "transition {transition}: unknown stack symbol {symbol}")
            }
            UnknownProp { context, prop } => write!(f, "{context}: unknown proposition {prop}"),
            NullOnNormalClock { transition, clock } => {
                write!(f, "transition {transition}: NULL constraint on normal clock {clock}")
            }
            EmptyInterval { transition, clock } => {
                write!(f, "transition {transition}: empty interval on clock {clock}")
            }
            DuplicateName { what, name } => write!(f, "duplicate {what} name {name:?}"),
            NoInitialState => f.write_str("no initial state"),
        }
    }
}

pub fn validate(a: &Automaton) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_states = a.states.len() as StateId;
    let n_clocks = a.clocks.len() as ClockId;
    let n_props = a.props.len();
    let prop_mask = if n_props >= 64 { u64::MAX } else { (1u64 << n_props) - 1 };

    for (what, names) in [
        ("state", &a.states),
        ("clock", &a.clocks.iter().map(|c| c.name.clone()).collect()),
        ("stack symbol", &a.stack_symbols),
        ("proposition", &a.props),
    ] {
        let mut seen = HashSet::new();
        for n in names.iter() {
            if !seen.insert(n) {
                out.push(Violation::DuplicateName { what, name: n.clone() });
            }
        }
    }
    if a.initial.is_empty() {
        out.push(Violation::NoInitialState);
    }
    for &q in &a.initial {
        if q >= n_states {
            out.push(Violation::UnknownState { context: "initial".into(), state: q });
        }
    }
    for (k, comp) in a.acceptance.iter().enumerate() {
        for &q in comp {
            if q >= n_states {
                out.push(Violation::UnknownState { context: format!("acceptance {k}"), state: q });
            }
        }
    }
    for (i, c) in a.clocks.iter().enumerate() {
        if let Some(e) = c.event_clock() {
            if e.prop >= n_props {
                out.push(Violation::UnknownProp { context: format!("clock {i}"), prop: e.prop });
            }
        }
    }
    for (i, t) in a.transitions.iter().enumerate() {
        for q in [t.source, t.target] {
            if q >= n_states {
                out.push(Violation::UnknownState { context: format!("transition {i}"), state: q });
            }
        }
        if t.symbol.props.bits() & !prop_mask != 0 {
            let prop = t.symbol.props.iter().find(|&p| p >= n_props).unwrap_or(n_props);
            out.push(Violation::UnknownProp { context: format!("transition {i}"), prop });
        }
        let tag_ok = matches!(
            (t.action, t.symbol.tag),
            (StackAction::Push(_), Tag::Call)
                | (StackAction::Pop(_), Tag::Ret)
                | (StackAction::Internal, Tag::Int)
        );
        if !tag_ok {
            out.push(Violation::VisiblyPushdown { transition: i, tag: t.symbol.tag });
        }
        let sym = match t.action {
            StackAction::Push(g) | StackAction::Pop(StackTop::Symbol(g)) => Some(g),
            _ => None,
        };
        if let Some(g) = sym {
            if g as usize >= a.stack_symbols.len() {
                out.push(Violation::UnknownStackSymbol { transition: i, symbol: g });
            }
        }
        for &c in &t.resets {
            if c >= n_clocks {
                out.push(Violation::UnknownClock { transition: i, clock: c });
            } else if !a.clocks[c as usize].is_normal() {
                out.push(Violation::ResetOfEventClock { transition: i, clock: c });
            }
        }
        for atom in &t.guard {
            if atom.clock >= n_clocks {
                out.push(Violation::UnknownClock { transition: i, clock: atom.clock });
                continue;
            }
            match atom.body {
                AtomBody::Null if a.clocks[atom.clock as usize].is_normal() => {
                    out.push(Violation::NullOnNormalClock { transition: i, clock: atom.clock })
                }
                AtomBody::Interval(iv) if iv.is_empty() => {
                    out.push(Violation::EmptyInterval { transition: i, clock: atom.clock })
                }
                _ => {}
            }
        }
    }
    out
}

/// Largest finite constant among all atoms (0 if none).
pub fn max_constant(a: &Automaton) -> u32 {
    a.transitions
        .iter()
        .flat_map(|t| &t.guard)
        .filter_map(|atom| match atom.body {
            AtomBody::Interval(i) => Some(i.max_constant()),
            AtomBody::Null => None,
        })
        .max()
        .unwrap_or(0)
}

/// Conjunction of all atoms on `clock` in `guard`: `None` when unsatisfiable,
/// `Some(None)` when there is no atom on the clock.
fn conjoin(guard: &[Atom], clock: ClockId) -> Option<Option<AtomBody>> {
    let mut acc: Option<AtomBody> = None;
    for atom in guard.iter().filter(|a| a.clock == clock) {
        acc = Some(match (acc, atom.body) {
            (None, b) => b,
            (Some(AtomBody::Null), AtomBody::Null) => AtomBody::Null,
            (Some(AtomBody::Interval(x)), AtomBody::Interval(y)) => {
                let z = x.intersect(&y);
                if z.is_empty() {
                    return None;
                }
                AtomBody::Interval(z)
            }
            _ => return None,
        });
    }
    Some(acc)
}

/// Rewrites `a` so that every transition carries exactly one atom on `clock`.
///
/// Transitions without an atom on `clock` are split into a `[0, ∞)` copy and
/// a NULL copy; several atoms are intersected and unsatisfiable conjunctions
/// are dropped.
pub fn normalize_for_clock(a: &Automaton, clock: ClockId) -> Automaton {
    let mut transitions = Vec::with_capacity(a.transitions.len() * 2);
    for t in &a.transitions {
        let rest: Vec<Atom> = t.guard.iter().filter(|x| x.clock != clock).copied().collect();
        let bodies = match conjoin(&t.guard, clock) {
            None => vec![],
            Some(Some(b)) => vec![b],
            Some(None) => vec![AtomBody::Interval(Interval::any()), AtomBody::Null],
        };
        for body in bodies {
            let mut guard = rest.clone();
            guard.push(Atom { clock, body });
            transitions.push(Transition { guard, ..t.clone() });
        }
    }
    Automaton { transitions, ..a.clone() }
}

/// Exact atom `clock ∈ I` on the single atom on `clock` of a normalized guard.
pub fn atom_on(guard: &[Atom], clock: ClockId) -> Option<AtomBody> {
    guard.iter().find(|a| a.clock == clock).map(|a| a.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::PropSet;

    pub(crate) fn two_state() -> Automaton {
        Automaton {
            props: vec!["p".into()],
            states: vec!["q0".into(), "q1".into()],
            initial: vec![0],
            clocks: vec![Clock::normal("x"), Clock::event("y", EventKind::AbsPredictor, 0)],
            stack_symbols: vec!["g".into()],
            transitions: vec![
                Transition {
                    source: 0,
                    symbol: Symbol::int(PropSet::EMPTY),
                    guard: vec![Atom::lower(0, LowerBound::gt(1))],
                    resets: vec![0],
                    action: StackAction::Internal,
                    target: 1,
                },
                Transition {
                    source: 1,
                    symbol: Symbol::call(PropSet::singleton(0)),
                    guard: vec![],
                    resets: vec![],
                    action: StackAction::Push(0),
                    target: 0,
                },
            ],
            acceptance: vec![vec![1]],
        }
    }

    #[test]
    fn well_formed_automaton_has_no_violations() {
        assert_eq!(validate(&two_state()), vec![]);
    }

    #[test]
    fn push_on_internal_symbol_is_reported() {
        let mut a = two_state();
        a.transitions[1].symbol.tag = Tag::Int;
        assert_eq!(
            validate(&a),
            vec![Violation::VisiblyPushdown { transition: 1, tag: Tag::Int }]
        );
    }

    #[test]
    fn event_clock_reset_is_reported() {
        let mut a = two_state();
        a.transitions[0].resets.push(1);
        assert_eq!(validate(&a), vec![Violation::ResetOfEventClock { transition: 0, clock: 1 }]);
    }

    #[test]
    fn null_on_normal_clock_and_empty_interval() {
        let mut a = two_state();
        a.transitions[0].guard = vec![
            Atom::null(0),
            Atom::interval(1, Interval::new(LowerBound::gt(2), UpperBound::le(2))),
        ];
        let v = validate(&a);
        assert!(v.contains(&Violation::NullOnNormalClock { transition: 0, clock: 0 }));
        assert!(v.contains(&Violation::EmptyInterval { transition: 0, clock: 1 }));
    }

    #[test]
    fn max_constant_examples() {
        let mut a = two_state();
        a.transitions[0].guard.clear();
        assert_eq!(max_constant(&a), 0);
        a.transitions[0].guard =
            vec![Atom::lower(1, LowerBound::gt(1)), Atom::upper(0, UpperBound::lt(5))];
        assert_eq!(max_constant(&a), 5);
    }

    #[test]
    fn normalize_splits_missing_atoms() {
        let a = normalize_for_clock(&two_state(), 1);
        assert_eq!(a.transitions.len(), 4);
        assert!(a.transitions.iter().all(|t| t.guard.iter().filter(|x| x.clock == 1).count() == 1));
        let bodies: Vec<_> = a.transitions.iter().map(|t| atom_on(&t.guard, 1).unwrap()).collect();
        assert_eq!(bodies[0], AtomBody::Interval(Interval::any()));
        assert_eq!(bodies[1], AtomBody::Null);
    }

    #[test]
    fn normalize_intersects_and_drops() {
        let mut a = two_state();
        let open = |l, u| Interval::new(LowerBound::gt(l), UpperBound::lt(u));
        a.transitions[0].guard = vec![Atom::interval(1, open(1, 3)), Atom::interval(1, open(2, 5))];
        a.transitions[1].guard = vec![Atom::interval(1, open(1, 2)), Atom::null(1)];
        let n = normalize_for_clock(&a, 1);
        assert_eq!(n.transitions.len(), 1);
        assert_eq!(atom_on(&n.transitions[0].guard, 1), Some(AtomBody::Interval(open(2, 3))));
    }

    #[test]
    fn interval_intersection_keeps_the_tighter_bound() {
        let a = Interval::new(LowerBound::ge(2), UpperBound::le(4));
        let b = Interval::new(LowerBound::gt(2), UpperBound::le(4));
        assert_eq!(a.intersect(&b), b);
        let c = Interval::new(LowerBound::ge(2), UpperBound::lt(4));
        assert_eq!(a.intersect(&c), c);
        assert!(Interval::new(LowerBound::ge(2), UpperBound::lt(2)).is_empty());
        assert!(!Interval::new(LowerBound::ge(2), UpperBound::le(2)).is_empty());
    }
}

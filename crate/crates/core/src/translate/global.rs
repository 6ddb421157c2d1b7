//! Removal of global recorder and global predictor clocks.

use crate::model::{Atom, AtomBody, Automaton, ClockId, StackAction, StackSymId, StackTop, StateId};
use crate::words::{EventKind, Prop};

use super::obligations::{con, BoundTable, Flag, NewClocks, ObligationSet, Prediction};
use super::product::{build, ClockLayout, Edge, EdgeAction, Rules};
use super::{
    check_table, fresh_names, prepare, sources, stats, Source, StepStats, TranslateError,
};

const BOTH: [bool; 2] = [false, true];

fn action(t: &Source) -> EdgeAction<StackSymId> {
    match t.action {
        StackAction::Push(g) => EdgeAction::Push(g),
        StackAction::Pop(StackTop::Bottom) => EdgeAction::Pop(None),
        StackAction::Pop(StackTop::Symbol(g)) => EdgeAction::Pop(Some(g)),
        StackAction::Internal => EdgeAction::Internal,
    }
}

fn pops(t: &Source, sym: StackSymId) -> bool {
    t.action == StackAction::Pop(StackTop::Symbol(sym))
}

fn is_symbol_pop(t: &Source) -> bool {
    matches!(t.action, StackAction::Pop(StackTop::Symbol(_)))
}

// Recorder: one clock `z` reset at every `p`, and a bit recording whether a
// `p` has been read.
struct RecorderRules<'a> {
    source: &'a Automaton,
    p: Prop,
    z: ClockId,
    by_state: Vec<Vec<Source>>,
}

impl RecorderRules<'_> {
    fn edge(&self, s: (StateId, bool), t: &Source, out: &mut Vec<Edge<(StateId, bool), StackSymId>>) {
        let mut guard = t.theta.clone();
        match t.body {
            AtomBody::Null if s.1 => return,
            AtomBody::Null => {}
            AtomBody::Interval(_) if !s.1 => return,
            AtomBody::Interval(i) => {
                if !(i.lower.is_trivial() && i.upper.is_trivial()) {
                    guard.push(Atom::interval(self.z, i));
                }
            }
        }
        let has_p = t.symbol.has(self.p);
        let mut resets = t.resets.clone();
        if has_p {
            resets.push(self.z);
        }
        out.push(Edge {
            symbol: t.symbol,
            guard,
            resets,
            action: action(t),
            target: (t.target, s.1 || has_p),
        });
    }
}

impl Rules for RecorderRules<'_> {
    type State = (StateId, bool);
    type Sym = StackSymId;

    fn lifts(&self, q: StateId) -> Vec<(StateId, bool)> {
        vec![(q, false)]
    }

    fn extra_lifts(&self, q: StateId) -> Vec<(StateId, bool)> {
        vec![(q, true)]
    }

    fn expand(&self, s: &(StateId, bool), out: &mut Vec<Edge<(StateId, bool), StackSymId>>) {
        for t in self.by_state[s.0 as usize].iter().filter(|t| !is_symbol_pop(t)) {
            self.edge(*s, t, out);
        }
    }

    fn expand_pop(
        &self,
        s: &(StateId, bool),
        sym: &StackSymId,
        out: &mut Vec<Edge<(StateId, bool), StackSymId>>,
    ) {
        for t in self.by_state[s.0 as usize].iter().filter(|t| pops(t, *sym)) {
            self.edge(*s, t, out);
        }
    }

    fn components(&self) -> usize {
        self.source.acceptance.len()
    }

    fn in_component(&self, s: &(StateId, bool), c: usize) -> bool {
        self.source.acceptance[c].contains(&s.0)
    }

    fn state_name(&self, s: &(StateId, bool)) -> String {
        let q = &self.source.states[s.0 as usize];
        if s.1 {
            format!("{q}+")
        } else {
            format!("{q}-")
        }
    }

    fn sym_name(&self, g: &StackSymId) -> String {
        self.source.stack_symbols[*g as usize].clone()
    }
}

/// Replaces the global recorder `clock` by a single normal clock reset at
/// every `p`.
pub fn remove_global_recorder(
    a: &Automaton,
    clock: ClockId,
) -> Result<(Automaton, StepStats), TranslateError> {
    let (norm, p) = prepare(a, clock, EventKind::GlobalRecorder)?;
    let name = a.clocks[clock as usize].name.clone();
    let layout = ClockLayout::new(&norm, clock, &[format!("z[{name}]")]);
    let rules = RecorderRules {
        source: &norm,
        p,
        z: layout.fresh[0],
        by_state: sources(&norm, clock, &layout),
    };
    let out = build(&rules, &norm, layout.clocks, true);
    let table = BoundTable::for_clock(&norm, clock);
    let bound = 2 * norm.states.len() as u128;
    let st = stats(&name, EventKind::GlobalRecorder, a, &out, &table, bound, a.clocks.len());
    Ok((out, st))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct GState {
    q: StateId,
    /// Pending obligations; upper bounds are always flagged first.
    o: ObligationSet,
    /// Some `p` is still owed to an earlier prediction.
    pend: bool,
    /// A NULL prediction was made: `p` never occurs again.
    none: bool,
    /// Guess that `p` holds at the current position.
    b: bool,
}

// Predictor: obligations in the control state, discharged at the next `p`.
struct PredictorRules<'a> {
    source: &'a Automaton,
    p: Prop,
    table: BoundTable,
    fresh: NewClocks,
    by_state: Vec<Vec<Source>>,
}

impl PredictorRules<'_> {
    fn edge(&self, s: &GState, t: &Source, out: &mut Vec<Edge<GState, StackSymId>>) {
        let a = t.symbol;
        let has_p = a.has(self.p);
        if s.b != has_p || (has_p && s.none) {
            return;
        }
        let mut guard = t.theta.clone();
        guard.extend(con(s.o, a, self.p, &self.table, &self.fresh));
        let (o2, pend2) = if has_p { (ObligationSet::EMPTY, false) } else { (s.o, s.pend) };
        let mut resets = t.resets.clone();
        let (o, pend, none) = match self.table.prediction(t.body) {
            Prediction::Null => {
                if !o2.is_empty() || pend2 {
                    return;
                }
                (o2, false, true)
            }
            Prediction::Bounds { lower, upper } => {
                if s.none {
                    return;
                }
                let mut o = o2;
                if let Some(l) = lower {
                    resets.push(self.fresh.lower[l as usize]);
                    o = o.with_lower(l);
                }
                if let Some(u) = upper {
                    if o2.upper(u).is_none() {
                        resets.push(self.fresh.upper[u as usize]);
                        o = o.with_upper(u, Flag::First);
                    }
                }
                (o, true, false)
            }
        };
        for b in BOTH {
            out.push(Edge {
                symbol: a,
                guard: guard.clone(),
                resets: resets.clone(),
                action: action(t),
                target: GState { q: t.target, o, pend, none, b },
            });
        }
    }
}

impl Rules for PredictorRules<'_> {
    type State = GState;
    type Sym = StackSymId;

    fn lifts(&self, q: StateId) -> Vec<GState> {
        BOTH.map(|b| GState { q, o: ObligationSet::EMPTY, pend: false, none: false, b }).to_vec()
    }

    fn expand(&self, s: &GState, out: &mut Vec<Edge<GState, StackSymId>>) {
        for t in self.by_state[s.q as usize].iter().filter(|t| !is_symbol_pop(t)) {
            self.edge(s, t, out);
        }
    }

    fn expand_pop(&self, s: &GState, sym: &StackSymId, out: &mut Vec<Edge<GState, StackSymId>>) {
        for t in self.by_state[s.q as usize].iter().filter(|t| pops(t, *sym)) {
            self.edge(s, t, out);
        }
    }

    fn components(&self) -> usize {
        self.source.acceptance.len() + 1
    }

    fn in_component(&self, s: &GState, c: usize) -> bool {
        match self.source.acceptance.get(c) {
            Some(f) => f.contains(&s.q),
            None => !s.pend || s.b,
        }
    }

    fn state_name(&self, s: &GState) -> String {
        format!(
            "{}{}{}{}{}",
            self.source.states[s.q as usize],
            s.o.fmt_with(&self.table),
            if s.pend { "?" } else { "" },
            if s.none { "#" } else { "" },
            if s.b { "!" } else { "" }
        )
    }

    fn sym_name(&self, g: &StackSymId) -> String {
        self.source.stack_symbols[*g as usize].clone()
    }
}

/// Replaces the global predictor `clock` by one normal clock per distinct
/// non-trivial bound used on it.
pub fn remove_global_predictor(
    a: &Automaton,
    clock: ClockId,
) -> Result<(Automaton, StepStats), TranslateError> {
    let (norm, p) = prepare(a, clock, EventKind::GlobalPredictor)?;
    let name = a.clocks[clock as usize].name.clone();
    let table = BoundTable::for_clock(&norm, clock);
    check_table(&table, &name)?;
    let layout = ClockLayout::new(&norm, clock, &fresh_names(&name, &table));
    let l = table.lowers.len();
    let fresh = NewClocks { lower: layout.fresh[..l].to_vec(), upper: layout.fresh[l..].to_vec() };
    let rules = PredictorRules {
        source: &norm,
        p,
        by_state: sources(&norm, clock, &layout),
        table,
        fresh,
    };
    let out = build(&rules, &norm, layout.clocks, true);
    let table = &rules.table;
    let bound = norm.states.len() as u128 * (1u128 << table.len()) * 6;
    let expected = a.clocks.len() - 1 + table.len();
    let st = stats(&name, EventKind::GlobalPredictor, a, &out, table, bound, expected);
    Ok((out, st))
}

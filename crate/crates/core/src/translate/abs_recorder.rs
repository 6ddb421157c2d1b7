//! Removal of an abstract recorder clock `x^abs_p`.
//!
//! Every bound gets a clock that a `p` on the current MAP restarts ("arms").
//! Upper clocks are armed at every such `p`; lower clocks only when a later
//! check reads them. A check `x^abs_p ≻ ℓ` reads an armed lower clock. A check
//! `x^abs_p ≺ u` reads an armed upper clock, or one locked by a caller that
//! still needs it after the matching return; locked clocks are never
//! restarted. The recorder state of the caller is saved on the stack.

use crate::model::{Atom, Automaton, ClockId, StackAction, StackSymId, StackTop, StateId};
use crate::words::{EventKind, Prop};

use super::obligations::{BoundTable, NewClocks, Prediction};
use super::product::{build, ClockLayout, Edge, EdgeAction, Rules};
use super::{
    check_table, fresh_names, prepare, sources, stats, Source, StepStats, TranslateError,
};

/// Recorder view of the current MAP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
struct Rec {
    seen: bool,
    armed_lower: u16,
    armed_upper: u16,
    /// Upper clocks owned by an enclosing MAP.
    locked: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct RState {
    q: StateId,
    r: Rec,
}

type RSym = (StackSymId, Rec);
type Out = Vec<Edge<RState, RSym>>;

struct RecorderRules<'a> {
    source: &'a Automaton,
    p: Prop,
    table: BoundTable,
    fresh: NewClocks,
    by_state: Vec<Vec<Source>>,
}

// all subsets of `mask`
fn subsets(mask: u16) -> impl Iterator<Item = u16> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

impl RecorderRules<'_> {
    /// Guard on the fresh clocks for reading `t` when the MAP of the current
    /// position is described by `r`; `None` if the check cannot be made.
    fn check(&self, t: &Source, r: Rec) -> Option<Vec<Atom>> {
        let mut guard = t.theta.clone();
        match self.table.prediction(t.body) {
            Prediction::Null => {
                if r.seen {
                    return None;
                }
            }
            Prediction::Bounds { lower, upper } => {
                if !r.seen {
                    return None;
                }
                if let Some(l) = lower {
                    if r.armed_lower & (1 << l) == 0 {
                        return None;
                    }
                    guard.push(Atom::lower(self.fresh.lower[l as usize], self.table.lowers[l as usize]));
                }
                if let Some(u) = upper {
                    if (r.armed_upper | r.locked) & (1 << u) == 0 {
                        return None;
                    }
                    guard.push(Atom::upper(self.fresh.upper[u as usize], self.table.uppers[u as usize]));
                }
            }
        }
        Some(guard)
    }

    /// Recorder views after reading `t`, with the fresh clocks restarted.
    fn update(&self, t: &Source, r: Rec) -> Vec<(Rec, Vec<ClockId>)> {
        if !t.symbol.has(self.p) {
            return vec![(r, t.resets.clone())];
        }
        let all_lower = ((1u32 << self.table.lowers.len()) - 1) as u16;
        let all_upper = ((1u32 << self.table.uppers.len()) - 1) as u16;
        // every unlocked upper clock is restarted; a lower clock only when a
        // later check of this MAP reads it
        let up = all_upper & !r.locked;
        subsets(all_lower)
            .map(|lo| {
                let mut resets = t.resets.clone();
                resets.extend((0..16).filter(|i| lo & (1 << i) != 0).map(|i| self.fresh.lower[i]));
                resets.extend((0..16).filter(|i| up & (1 << i) != 0).map(|i| self.fresh.upper[i]));
                (Rec { seen: true, armed_lower: lo, armed_upper: up, locked: r.locked }, resets)
            })
            .collect()
    }

    fn emit(&self, t: &Source, eval: Rec, out: &mut Out, action: impl Fn(Rec) -> (EdgeAction<RSym>, Rec)) {
        let Some(guard) = self.check(t, eval) else {
            return;
        };
        for (post, resets) in self.update(t, eval) {
            let (act, next) = action(post);
            out.push(Edge {
                symbol: t.symbol,
                guard: guard.clone(),
                resets,
                action: act,
                target: RState { q: t.target, r: next },
            });
        }
    }
}

impl Rules for RecorderRules<'_> {
    type State = RState;
    type Sym = RSym;

    fn lifts(&self, q: StateId) -> Vec<RState> {
        vec![RState { q, r: Rec::default() }]
    }

    fn extra_lifts(&self, q: StateId) -> Vec<RState> {
        let all = |n: usize| ((1u32 << n) - 1) as u16;
        let r = Rec {
            seen: true,
            armed_lower: all(self.table.lowers.len()),
            armed_upper: all(self.table.uppers.len()),
            locked: 0,
        };
        vec![RState { q, r }]
    }

    fn expand(&self, s: &RState, out: &mut Out) {
        for t in &self.by_state[s.q as usize] {
            match t.action {
                StackAction::Internal => {
                    self.emit(t, s.r, out, |post| (EdgeAction::Internal, post));
                }
                StackAction::Push(g) => {
                    let Some(guard) = self.check(t, s.r) else {
                        continue;
                    };
                    for (post, resets) in self.update(t, s.r) {
                        // upper clocks the caller keeps for after the return
                        for keep in subsets(post.armed_upper) {
                            let saved = Rec { armed_upper: keep, ..post };
                            let inner = Rec { locked: post.locked | keep, ..Rec::default() };
                            out.push(Edge {
                                symbol: t.symbol,
                                guard: guard.clone(),
                                resets: resets.clone(),
                                action: EdgeAction::Push((g, saved)),
                                target: RState { q: t.target, r: inner },
                            });
                        }
                    }
                }
                StackAction::Pop(StackTop::Bottom) => {
                    // an unmatched return starts a new MAP
                    self.emit(t, Rec::default(), out, |post| (EdgeAction::Pop(None), post));
                }
                StackAction::Pop(StackTop::Symbol(_)) => {}
            }
        }
    }

    fn expand_pop(&self, s: &RState, sym: &RSym, out: &mut Out) {
        let (gamma, saved) = *sym;
        for t in &self.by_state[s.q as usize] {
            if t.action == StackAction::Pop(StackTop::Symbol(gamma)) {
                self.emit(t, saved, out, |post| (EdgeAction::Pop(Some(*sym)), post));
            }
        }
    }

    fn components(&self) -> usize {
        self.source.acceptance.len()
    }

    fn in_component(&self, s: &RState, c: usize) -> bool {
        self.source.acceptance[c].contains(&s.q)
    }

    fn state_name(&self, s: &RState) -> String {
        format!("{}{}", self.source.states[s.q as usize], self.rec_name(s.r))
    }

    fn sym_name(&self, g: &RSym) -> String {
        format!("{}{}", self.source.stack_symbols[g.0 as usize], self.rec_name(g.1))
    }
}

impl RecorderRules<'_> {
    fn rec_name(&self, r: Rec) -> String {
        let mut parts = Vec::new();
        for (i, b) in self.table.lowers.iter().enumerate() {
            if r.armed_lower & (1 << i) != 0 {
                parts.push(b.to_string());
            }
        }
        for (i, b) in self.table.uppers.iter().enumerate() {
            if r.armed_upper & (1 << i) != 0 {
                parts.push(b.to_string());
            } else if r.locked & (1 << i) != 0 {
                parts.push(format!("^{b}"));
            }
        }
        format!("{}{{{}}}", if r.seen { "+" } else { "-" }, parts.join(","))
    }
}

/// Replaces the abstract recorder `clock` by one normal clock per distinct
/// non-trivial bound used on it.
pub fn remove_abstract_recorder(
    a: &Automaton,
    clock: ClockId,
) -> Result<(Automaton, StepStats), TranslateError> {
    let (norm, p) = prepare(a, clock, EventKind::AbsRecorder)?;
    let name = a.clocks[clock as usize].name.clone();
    let table = BoundTable::for_clock(&norm, clock);
    check_table(&table, &name)?;
    let layout = ClockLayout::new(&norm, clock, &fresh_names(&name, &table));
    let l = table.lowers.len();
    let fresh = NewClocks { lower: layout.fresh[..l].to_vec(), upper: layout.fresh[l..].to_vec() };
    let rules = RecorderRules {
        source: &norm,
        p,
        by_state: sources(&norm, clock, &layout),
        table,
        fresh,
    };
    let out = build(&rules, &norm, layout.clocks, true);
    let table = &rules.table;
    let bound = norm.states.len() as u128
        * 2
        * (1u128 << table.lowers.len())
        * 3u128.pow(table.uppers.len() as u32);
    let expected = a.clocks.len() - 1 + table.len();
    let st = stats(&name, EventKind::AbsRecorder, a, &out, table, bound, expected);
    Ok((out, st))
}

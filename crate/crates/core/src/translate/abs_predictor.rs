//! Removal of an abstract predictor clock `y^abs_p`.
//!
//! Predictions on `y^abs_p` become obligations discharged at the next `p`
//! on the current MAP. Obligations of a caller travel on the stack to the
//! matching return; its upper bounds stay live inside the call.

use crate::model::{Atom, Automaton, ClockId, StackAction, StackTop, StackSymId, StateId};
use crate::words::{EventKind, Prop, Symbol};

use super::obligations::{
    abs_step, con, AbsOutcome, BoundTable, CheckSet, NewClocks, ObligationSet, Prediction,
};
use super::product::{build, ClockLayout, Edge, EdgeAction, Rules};
use super::{
    check_table, fresh_names, prepare, sources, stats, Mutation, Source, StepStats,
    TranslateError, TranslateOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct PState {
    q: StateId,
    o: ObligationSet,
    k: CheckSet,
    /// Guess that `p` holds at the current position.
    b: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PSym {
    Pair(StackSymId, ObligationSet, CheckSet),
    Bad,
}

struct PredictorRules<'a> {
    source: &'a Automaton,
    p: Prop,
    table: BoundTable,
    fresh: NewClocks,
    by_state: Vec<Vec<Source>>,
    mutation: Option<Mutation>,
}

type Out = Vec<Edge<PState, PSym>>;

const BOTH: [bool; 2] = [false, true];

impl PredictorRules<'_> {
    fn fresh_resets(&self, t: &Source, r: Option<&AbsOutcome>) -> Vec<ClockId> {
        let mut resets = t.resets.clone();
        if let Some(r) = r {
            resets.extend(r.reset_lower.map(|i| self.fresh.lower[i as usize]));
            resets.extend(r.reset_upper.map(|i| self.fresh.upper[i as usize]));
        }
        resets
    }

    fn guard(&self, t: &Source, o: ObligationSet, a: Symbol) -> Vec<Atom> {
        let mut g = t.theta.clone();
        g.extend(con(o, a, self.p, &self.table, &self.fresh));
        g
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &self,
        out: &mut Out,
        t: &Source,
        guard: &[Atom],
        resets: &[ClockId],
        action: impl Fn() -> EdgeAction<PSym>,
        o: ObligationSet,
        at_return: bool,
        evs: &[bool],
        pinfs: &[bool],
    ) {
        for &ev in evs {
            for &pinf in pinfs {
                for b in BOTH {
                    // p here means the MAP visits p from here on
                    if b && !ev {
                        continue;
                    }
                    out.push(Edge {
                        symbol: t.symbol,
                        guard: guard.to_vec(),
                        resets: resets.to_vec(),
                        action: action(),
                        target: PState { q: t.target, o, k: CheckSet::new(at_return, ev, pinf), b },
                    });
                }
            }
        }
    }

    // successor along the MAP is not a return
    fn emit_step(
        &self,
        out: &mut Out,
        t: &Source,
        guard: &[Atom],
        r: &AbsOutcome,
        action: impl Fn() -> EdgeAction<PSym>,
    ) {
        let resets = self.fresh_resets(t, Some(r));
        self.emit(out, t, guard, &resets, action, r.next, false, &[r.next_ev], &[r.next_pinf]);
    }

    fn applies(&self, s: &PState, t: &Source) -> bool {
        s.b == t.symbol.has(self.p) && s.k.matches(t.symbol)
    }
}

impl Rules for PredictorRules<'_> {
    type State = PState;
    type Sym = PSym;

    fn lifts(&self, q: StateId) -> Vec<PState> {
        let mut out = Vec::new();
        for k in CheckSet::all() {
            for b in BOTH {
                if !b || k.ev {
                    out.push(PState { q, o: ObligationSet::EMPTY, k, b });
                }
            }
        }
        out
    }

    fn expand(&self, s: &PState, out: &mut Out) {
        let PState { o, k, .. } = *s;
        for t in &self.by_state[s.q as usize] {
            if !self.applies(s, t) {
                continue;
            }
            let a = t.symbol;
            let has_p = a.has(self.p);
            let pred = self.table.prediction(t.body);
            let null = pred == Prediction::Null;
            match t.action {
                StackAction::Internal => {
                    let guard = self.guard(t, o, a);
                    // the MAP ends here
                    if null && k.ev == has_p && (has_p || o == o.live()) {
                        let resets = self.fresh_resets(t, None);
                        let act = || EdgeAction::Internal;
                        self.emit(out, t, &guard, &resets, act, ObligationSet::EMPTY, true, &BOTH, &BOTH);
                    }
                    if let Some(r) = abs_step(o, k, a, pred, self.p, self.mutation) {
                        self.emit_step(out, t, &guard, &r, || EdgeAction::Internal);
                    }
                }
                StackAction::Push(g) => {
                    let guard = self.guard(t, o, a);
                    if let Some(r) = abs_step(o, k, a, pred, self.p, self.mutation) {
                        let k_ret = CheckSet::new(true, r.next_ev, r.next_pinf);
                        let sym = PSym::Pair(g, r.next, k_ret);
                        let act = || EdgeAction::Push(sym);
                        let resets = self.fresh_resets(t, Some(&r));
                        // the call body is empty
                        self.emit(out, t, &guard, &resets, act, ObligationSet::EMPTY, true, &[k_ret.ev], &[k_ret.pinf]);
                        let inner_pinf: &[bool] = if self.mutation == Some(Mutation::DropPInfPropagation) {
                            &BOTH
                        } else {
                            &[false]
                        };
                        self.emit(out, t, &guard, &resets, act, r.next.called(), false, &BOTH, inner_pinf);
                    }
                    let bad_allowed = self.mutation != Some(Mutation::DropBadBranch);
                    if bad_allowed && null && k.ev == has_p && k.pinf && (has_p || o.is_empty()) {
                        let resets = self.fresh_resets(t, None);
                        let act = || EdgeAction::Push(PSym::Bad);
                        self.emit(out, t, &guard, &resets, act, ObligationSet::EMPTY, false, &BOTH, &[true]);
                    }
                }
                StackAction::Pop(StackTop::Bottom) => {
                    if !o.is_empty() || !k.pinf {
                        continue;
                    }
                    let guard = t.theta.clone();
                    let act = || EdgeAction::Pop(None);
                    if let Some(r) = abs_step(o, k, a, pred, self.p, self.mutation) {
                        self.emit_step(out, t, &guard, &r, act);
                    }
                    if null && k.ev == has_p {
                        let resets = self.fresh_resets(t, None);
                        self.emit(out, t, &guard, &resets, act, ObligationSet::EMPTY, true, &BOTH, &[true]);
                    }
                }
                StackAction::Pop(StackTop::Symbol(_)) => {}
            }
        }
    }

    fn expand_pop(&self, s: &PState, sym: &PSym, out: &mut Out) {
        let PSym::Pair(gamma, o_ret, k_ret) = *sym else {
            return;
        };
        let PState { o, k, .. } = *s;
        if !o.is_empty() || k_ret != k {
            return;
        }
        for t in &self.by_state[s.q as usize] {
            if t.action != StackAction::Pop(StackTop::Symbol(gamma)) || !self.applies(s, t) {
                continue;
            }
            let a = t.symbol;
            let has_p = a.has(self.p);
            let pred = self.table.prediction(t.body);
            let guard = self.guard(t, o_ret, a);
            let act = || EdgeAction::Pop(Some(*sym));
            if let Some(r) = abs_step(o_ret, k, a, pred, self.p, self.mutation) {
                self.emit_step(out, t, &guard, &r, act);
            }
            if pred == Prediction::Null && k.ev == has_p && (has_p || o_ret == o_ret.live()) {
                let resets = self.fresh_resets(t, None);
                self.emit(out, t, &guard, &resets, act, ObligationSet::EMPTY, true, &BOTH, &BOTH);
            }
        }
    }

    fn components(&self) -> usize {
        self.source.acceptance.len() + 1
    }

    fn in_component(&self, s: &PState, c: usize) -> bool {
        match self.source.acceptance.get(c) {
            Some(f) => f.contains(&s.q),
            None if self.mutation == Some(Mutation::DropFulfilledBit) => s.k.pinf && !s.k.ev,
            None => s.k.pinf && (!s.k.ev || s.b),
        }
    }

    fn state_name(&self, s: &PState) -> String {
        format!(
            "{}{}{}{}",
            self.source.states[s.q as usize],
            s.o.fmt_with(&self.table),
            s.k,
            if s.b { "!" } else { "" }
        )
    }

    fn sym_name(&self, g: &PSym) -> String {
        match *g {
            PSym::Pair(gamma, o, k) => {
                format!("{}{}{}", self.source.stack_symbols[gamma as usize], o.fmt_with(&self.table), k)
            }
            PSym::Bad => "bad".to_string(),
        }
    }
}

/// Replaces the abstract predictor `clock` by one normal clock per distinct
/// non-trivial bound used on it.
pub fn remove_abstract_predictor(
    a: &Automaton,
    clock: ClockId,
    opts: TranslateOptions,
) -> Result<(Automaton, StepStats), TranslateError> {
    let (norm, p) = prepare(a, clock, EventKind::AbsPredictor)?;
    let name = a.clocks[clock as usize].name.clone();
    let table = BoundTable::for_clock(&norm, clock);
    check_table(&table, &name)?;
    let layout = ClockLayout::new(&norm, clock, &fresh_names(&name, &table));
    let l = table.lowers.len();
    let fresh = NewClocks {
        lower: layout.fresh[..l].to_vec(),
        upper: layout.fresh[l..].to_vec(),
    };
    let rules = PredictorRules {
        source: &norm,
        p,
        by_state: sources(&norm, clock, &layout),
        table,
        fresh,
        mutation: opts.mutation,
    };
    let out = build(&rules, &norm, layout.clocks, true);
    let table = &rules.table;
    let bound = norm.states.len() as u128
        * (1u128 << table.lowers.len())
        * 3u128.pow(table.uppers.len() as u32)
        * 12;
    let expected = a.clocks.len() - 1 + table.len();
    let st = stats(&name, EventKind::AbsPredictor, a, &out, table, bound, expected);
    Ok((out, st))
}

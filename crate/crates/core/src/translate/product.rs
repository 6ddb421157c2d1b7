//! Worklist construction of a translated automaton from a set of local rules.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use crate::model::{
    Atom, Automaton, Clock, ClockConstraint, ClockId, StackAction, StackSymId, StackTop, StateId,
    Transition,
};
use crate::words::Symbol;

pub(super) enum EdgeAction<G> {
    Push(G),
    /// `None` pops the bottom marker.
    Pop(Option<G>),
    Internal,
}

pub(super) struct Edge<S, G> {
    pub symbol: Symbol,
    pub guard: ClockConstraint,
    pub resets: Vec<ClockId>,
    pub action: EdgeAction<G>,
    pub target: S,
}

pub(super) trait Rules {
    type State: Clone + Eq + Hash;
    type Sym: Clone + Eq + Hash;

    /// States standing for source state `q` before anything is read.
    fn lifts(&self, q: StateId) -> Vec<Self::State>;
    /// Further states standing for `q`, explored so that every source
    /// transition keeps a representative.
    fn extra_lifts(&self, _q: StateId) -> Vec<Self::State> {
        Vec::new()
    }
    /// Push, internal and bottom-pop edges leaving `s`.
    fn expand(&self, s: &Self::State, out: &mut Vec<Edge<Self::State, Self::Sym>>);
    /// Pop edges leaving `s` when `sym` is on top of the stack.
    fn expand_pop(
        &self,
        s: &Self::State,
        sym: &Self::Sym,
        out: &mut Vec<Edge<Self::State, Self::Sym>>,
    );
    fn components(&self) -> usize;
    fn in_component(&self, s: &Self::State, c: usize) -> bool;
    fn state_name(&self, s: &Self::State) -> String;
    fn sym_name(&self, g: &Self::Sym) -> String;
}

/// Clock numbering of the output: the input clocks without the removed one,
/// followed by the fresh clocks.
pub(super) struct ClockLayout {
    old_to_new: Vec<Option<ClockId>>,
    pub clocks: Vec<Clock>,
    pub fresh: Vec<ClockId>,
}

impl ClockLayout {
    pub fn new(a: &Automaton, removed: ClockId, fresh_names: &[String]) -> Self {
        let mut clocks = Vec::new();
        let mut old_to_new = Vec::with_capacity(a.clocks.len());
        for (i, c) in a.clocks.iter().enumerate() {
            if i as ClockId == removed {
                old_to_new.push(None);
            } else {
                old_to_new.push(Some(clocks.len() as ClockId));
                clocks.push(c.clone());
            }
        }
        let mut fresh = Vec::with_capacity(fresh_names.len());
        for name in fresh_names {
            let mut unique = name.clone();
            while clocks.iter().any(|c| c.name == unique) {
                unique.push('\'');
            }
            fresh.push(clocks.len() as ClockId);
            clocks.push(Clock::normal(unique));
        }
        ClockLayout { old_to_new, clocks, fresh }
    }

    /// Guard without its atom on the removed clock, renumbered.
    pub fn guard(&self, guard: &[Atom]) -> ClockConstraint {
        guard
            .iter()
            .filter_map(|at| self.old_to_new[at.clock as usize].map(|c| Atom { clock: c, body: at.body }))
            .collect()
    }

    pub fn resets(&self, resets: &[ClockId]) -> Vec<ClockId> {
        resets.iter().filter_map(|&c| self.old_to_new[c as usize]).collect()
    }
}

/// Explores, ignoring clocks, every state reachable from the lifts of the
/// initial source states or, with `cover`, of all source states.
///
/// A pop of `g` is generated only in states reachable from a push of `g`
/// by well-matched paths, and a bottom pop only in states reachable with
/// an empty stack. Initial states are the lifts of the initial source
/// states either way.
pub(super) fn build<R: Rules>(
    rules: &R,
    source: &Automaton,
    clocks: Vec<Clock>,
    cover: bool,
) -> Automaton {
    let mut ex = Explorer::<R> {
        index: HashMap::new(),
        states: Vec::new(),
        sym_index: HashMap::new(),
        syms: Vec::new(),
        edges: Vec::new(),
        out: Vec::new(),
        seen: HashSet::new(),
        work: Vec::new(),
        callers: Vec::new(),
        returns: Vec::new(),
    };
    let mut initial: Vec<u32> = Vec::new();
    for &q in &source.initial {
        for s in rules.lifts(q) {
            let i = ex.state(&s);
            if !initial.contains(&i) {
                initial.push(i);
            }
            ex.visit(i, BOTTOM);
        }
    }
    if cover {
        for q in 0..source.states.len() as StateId {
            for s in rules.lifts(q).into_iter().chain(rules.extra_lifts(q)) {
                let i = ex.state(&s);
                ex.visit(i, BOTTOM);
            }
        }
    }
    let mut buf = Vec::new();
    while let Some((s, ctx)) = ex.work.pop() {
        if ex.out[s as usize].is_none() {
            buf.clear();
            rules.expand(&ex.states[s as usize].clone(), &mut buf);
            let mut ids = Vec::with_capacity(buf.len());
            for e in buf.drain(..) {
                ids.push(ex.edges.len());
                let e = ex.lower(e);
                ex.edges.push((s, e, false));
            }
            ex.out[s as usize] = Some(ids);
        }
        let ids = ex.out[s as usize].clone().expect("expanded");
        for k in ids {
            let (target, action) = (ex.edges[k].1.target, &ex.edges[k].1.action);
            match *action {
                EdgeAction::Internal => {
                    ex.edges[k].2 = true;
                    ex.visit(target, ctx);
                }
                EdgeAction::Pop(None) => {
                    if ctx == BOTTOM {
                        ex.edges[k].2 = true;
                        ex.visit(target, BOTTOM);
                    }
                }
                EdgeAction::Push(g) => {
                    ex.edges[k].2 = true;
                    let inner = g + 1;
                    ex.visit(target, inner);
                    if ex.add_caller(g, ctx) {
                        for v in ex.returns[g as usize].clone() {
                            ex.visit(v, ctx);
                        }
                    }
                }
                EdgeAction::Pop(Some(_)) => unreachable!("pops come from expand_pop"),
            }
        }
        if ctx != BOTTOM {
            let g = ctx - 1;
            buf.clear();
            rules.expand_pop(&ex.states[s as usize].clone(), &ex.syms[g as usize].clone(), &mut buf);
            for e in buf.drain(..) {
                let e = ex.lower(e);
                let v = e.target;
                ex.edges.push((s, e, true));
                if !ex.returns[g as usize].contains(&v) {
                    ex.returns[g as usize].push(v);
                    for c in ex.callers[g as usize].clone() {
                        ex.visit(v, c);
                    }
                }
            }
        }
    }

    let Explorer { states, syms, edges, out, .. } = ex;
    // states only named as targets of unused bottom pops are dropped
    let mut state_map = vec![u32::MAX; states.len()];
    let mut kept = Vec::new();
    for (i, s) in states.iter().enumerate() {
        if out[i].is_some() {
            state_map[i] = kept.len() as u32;
            kept.push(s);
        }
    }
    let names: Vec<String> = kept.iter().map(|s| rules.state_name(s)).collect();
    let mut sym_map = vec![u32::MAX; syms.len()];
    let mut sym_names = Vec::new();
    for (_, e, used) in &edges {
        if let (EdgeAction::Push(g), true) = (&e.action, used) {
            if sym_map[*g as usize] == u32::MAX {
                sym_map[*g as usize] = sym_names.len() as u32;
                sym_names.push(rules.sym_name(&syms[*g as usize]));
            }
        }
    }
    let transitions = edges
        .into_iter()
        .filter(|(_, _, used)| *used)
        .map(|(src, e, _)| Transition {
            source: state_map[src as usize],
            symbol: e.symbol,
            guard: e.guard,
            resets: e.resets,
            action: match e.action {
                EdgeAction::Push(g) => StackAction::Push(sym_map[g as usize]),
                EdgeAction::Pop(None) => StackAction::Pop(StackTop::Bottom),
                EdgeAction::Pop(Some(g)) => StackAction::Pop(StackTop::Symbol(sym_map[g as usize])),
                EdgeAction::Internal => StackAction::Internal,
            },
            target: state_map[e.target as usize],
        })
        .collect();
    let acceptance = (0..rules.components())
        .map(|c| {
            kept
                .iter()
                .enumerate()
                .filter(|(_, s)| rules.in_component(s, c))
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect();
    Automaton {
        props: source.props.clone(),
        states: names,
        initial: initial.into_iter().map(|i| state_map[i as usize]).collect(),
        clocks,
        stack_symbols: sym_names,
        transitions,
        acceptance,
    }
}

const BOTTOM: u32 = 0;

struct Explorer<R: Rules> {
    index: HashMap<R::State, u32>,
    states: Vec<R::State>,
    sym_index: HashMap<R::Sym, u32>,
    syms: Vec<R::Sym>,
    /// Source, edge and whether it is part of the output.
    edges: Vec<(u32, Edge<u32, u32>, bool)>,
    /// Indices of the push, internal and bottom-pop edges of each state.
    out: Vec<Option<Vec<usize>>>,
    /// Visited (state, context) pairs; context 0 is the empty stack and
    /// `g + 1` has symbol `g` on top.
    seen: HashSet<(u32, u32)>,
    work: Vec<(u32, u32)>,
    /// Contexts in which each symbol is pushed.
    callers: Vec<Vec<u32>>,
    /// States reached by popping each symbol.
    returns: Vec<Vec<u32>>,
}

impl<R: Rules> Explorer<R> {
    fn state(&mut self, s: &R::State) -> u32 {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        let i = self.states.len() as u32;
        self.index.insert(s.clone(), i);
        self.states.push(s.clone());
        self.out.push(None);
        i
    }

    fn sym(&mut self, g: &R::Sym) -> u32 {
        if let Some(&i) = self.sym_index.get(g) {
            return i;
        }
        let i = self.syms.len() as u32;
        self.sym_index.insert(g.clone(), i);
        self.syms.push(g.clone());
        self.callers.push(Vec::new());
        self.returns.push(Vec::new());
        i
    }

    fn visit(&mut self, s: u32, ctx: u32) {
        if self.seen.insert((s, ctx)) {
            self.work.push((s, ctx));
        }
    }

    fn add_caller(&mut self, g: u32, ctx: u32) -> bool {
        let callers = &mut self.callers[g as usize];
        if callers.contains(&ctx) {
            return false;
        }
        callers.push(ctx);
        true
    }

    fn lower(&mut self, e: Edge<R::State, R::Sym>) -> Edge<u32, u32> {
        let action = match &e.action {
            EdgeAction::Push(g) => EdgeAction::Push(self.sym(g)),
            EdgeAction::Pop(Some(g)) => EdgeAction::Pop(Some(self.sym(g))),
            EdgeAction::Pop(None) => EdgeAction::Pop(None),
            EdgeAction::Internal => EdgeAction::Internal,
        };
        let target = self.state(&e.target);
        let mut resets = e.resets;
        resets.sort_unstable();
        resets.dedup();
        Edge { symbol: e.symbol, guard: e.guard, resets, action, target }
    }
}

struct Identity<'a>(&'a Automaton);

impl Rules for Identity<'_> {
    type State = StateId;
    type Sym = StackSymId;

    fn lifts(&self, q: StateId) -> Vec<StateId> {
        vec![q]
    }

    fn expand(&self, s: &StateId, out: &mut Vec<Edge<StateId, StackSymId>>) {
        for t in self.0.transitions.iter().filter(|t| t.source == *s) {
            let action = match t.action {
                StackAction::Push(g) => EdgeAction::Push(g),
                StackAction::Pop(StackTop::Bottom) => EdgeAction::Pop(None),
                StackAction::Internal => EdgeAction::Internal,
                StackAction::Pop(StackTop::Symbol(_)) => continue,
            };
            out.push(Edge {
                symbol: t.symbol,
                guard: t.guard.clone(),
                resets: t.resets.clone(),
                action,
                target: t.target,
            });
        }
    }

    fn expand_pop(&self, s: &StateId, g: &StackSymId, out: &mut Vec<Edge<StateId, StackSymId>>) {
        for t in &self.0.transitions {
            if t.source == *s && t.action == StackAction::Pop(StackTop::Symbol(*g)) {
                out.push(Edge {
                    symbol: t.symbol,
                    guard: t.guard.clone(),
                    resets: t.resets.clone(),
                    action: EdgeAction::Pop(Some(*g)),
                    target: t.target,
                });
            }
        }
    }

    fn components(&self) -> usize {
        self.0.acceptance.len()
    }

    fn in_component(&self, s: &StateId, c: usize) -> bool {
        self.0.acceptance[c].contains(s)
    }

    fn state_name(&self, s: &StateId) -> String {
        self.0.states[*s as usize].clone()
    }

    fn sym_name(&self, g: &StackSymId) -> String {
        self.0.stack_symbols[*g as usize].clone()
    }
}

/// The part of `a` that some run can use when clock constraints are
/// ignored: reachable states, and pops only where their symbol can be on
/// top of the stack.
pub fn reachable_part(a: &Automaton) -> Automaton {
    build(&Identity(a), a, a.clocks.clone(), false)
}

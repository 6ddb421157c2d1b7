//! Event-clock removal.
//!
//! Each removal replaces one event clock by fresh normal clocks and extra
//! control state while preserving the accepted language.

mod abs_predictor;
mod abs_recorder;
mod global;
pub mod obligations;
mod pipeline;
mod product;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    atom_on, normalize_for_clock, AtomBody, Automaton, ClockConstraint, ClockId, StackAction,
    StateId,
};
use crate::words::{EventKind, Prop, Symbol};

pub use abs_predictor::remove_abstract_predictor;
pub use abs_recorder::remove_abstract_recorder;
pub use global::{remove_global_predictor, remove_global_recorder};
pub use pipeline::{remove_all_event_clocks, PipelineStats};
pub use product::reachable_part;

/// Deliberate construction faults, used to show the differential harness
/// can fail. Only the abstract predictor removal honours them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Extra acceptance component ignores whether `p` was just read.
    DropFulfilledBit,
    /// A repeated lower-bound prediction keeps the older clock.
    SkipLowerReset,
    /// An upper-bound clock is restarted while its first obligation is pending.
    AllowUpperReReset,
    /// Inner MAPs may claim `p_∞`.
    DropPInfPropagation,
    /// Calls can never be guessed unmatched.
    DropBadBranch,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DropFulfilledBit,
        Mutation::SkipLowerReset,
        Mutation::AllowUpperReReset,
        Mutation::DropPInfPropagation,
        Mutation::DropBadBranch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::DropFulfilledBit => "drop-fulfilled-bit",
            Mutation::SkipLowerReset => "skip-lower-reset",
            Mutation::AllowUpperReReset => "allow-upper-re-reset",
            Mutation::DropPInfPropagation => "drop-pinf-propagation",
            Mutation::DropBadBranch => "drop-bad-branch",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    pub mutation: Option<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("no clock named `{0}`")]
    UnknownClock(String),
    #[error("clock `{name}` is not {expected}")]
    WrongKind { name: String, expected: &'static str },
    #[error("clock `{name}` has more than 16 distinct {what} bounds")]
    TooManyBounds { name: String, what: &'static str },
}

/// Sizes before and after one removal step and the bounds they must meet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub clock: String,
    pub kind: EventKind,
    pub states_in: usize,
    pub clocks_in: usize,
    pub lower_bounds: usize,
    pub upper_bounds: usize,
    pub states_out: usize,
    pub clocks_out: usize,
    pub state_bound: u128,
    pub expected_clocks: usize,
    pub max_constant_in: u32,
    pub max_constant_out: u32,
}

impl StepStats {
    pub fn states_ok(&self) -> bool {
        self.states_out as u128 <= self.state_bound
    }

    pub fn clocks_ok(&self) -> bool {
        self.clocks_out == self.expected_clocks
    }

    pub fn max_constant_ok(&self) -> bool {
        self.max_constant_in == self.max_constant_out
    }

    pub fn ok(&self) -> bool {
        self.states_ok() && self.clocks_ok() && self.max_constant_ok()
    }
}

/// Removes one event clock, dispatching on its kind.
pub fn remove_clock(
    a: &Automaton,
    clock: ClockId,
    opts: TranslateOptions,
) -> Result<(Automaton, StepStats), TranslateError> {
    let c = a
        .clocks
        .get(clock as usize)
        .ok_or_else(|| TranslateError::UnknownClock(format!("#{clock}")))?;
    let ev = c.event_clock().ok_or_else(|| TranslateError::WrongKind {
        name: c.name.clone(),
        expected: "an event clock",
    })?;
    match ev.kind {
        EventKind::GlobalRecorder => remove_global_recorder(a, clock),
        EventKind::GlobalPredictor => remove_global_predictor(a, clock),
        EventKind::AbsRecorder => remove_abstract_recorder(a, clock),
        EventKind::AbsPredictor => remove_abstract_predictor(a, clock, opts),
    }
}

/// Removes the event clock with the given name.
pub fn remove_clock_named(
    a: &Automaton,
    name: &str,
    opts: TranslateOptions,
) -> Result<(Automaton, StepStats), TranslateError> {
    let id = a.clock_id(name).ok_or_else(|| TranslateError::UnknownClock(name.to_string()))?;
    remove_clock(a, id, opts)
}

// A source transition after normalization, with its guard split into the
// atom on the removed clock and the renumbered rest.
struct Source {
    symbol: Symbol,
    theta: ClockConstraint,
    body: AtomBody,
    resets: Vec<ClockId>,
    action: StackAction,
    target: StateId,
}

// Normalized transitions grouped by source state.
fn sources(
    a: &Automaton,
    clock: ClockId,
    layout: &product::ClockLayout,
) -> Vec<Vec<Source>> {
    let mut out: Vec<Vec<Source>> = (0..a.states.len()).map(|_| Vec::new()).collect();
    for t in &a.transitions {
        out[t.source as usize].push(Source {
            symbol: t.symbol,
            theta: layout.guard(&t.guard),
            body: atom_on(&t.guard, clock).expect("normalized guard"),
            resets: layout.resets(&t.resets),
            action: t.action,
            target: t.target,
        });
    }
    out
}

// Checks `clock` has the expected kind and returns the normalized automaton
// and the clock's proposition.
fn prepare(
    a: &Automaton,
    clock: ClockId,
    kind: EventKind,
) -> Result<(Automaton, Prop), TranslateError> {
    let c = a
        .clocks
        .get(clock as usize)
        .ok_or_else(|| TranslateError::UnknownClock(format!("#{clock}")))?;
    match c.event_clock() {
        Some(ev) if ev.kind == kind => Ok((normalize_for_clock(a, clock), ev.prop)),
        _ => Err(TranslateError::WrongKind { name: c.name.clone(), expected: kind.as_str() }),
    }
}

fn check_table(
    table: &obligations::BoundTable,
    name: &str,
) -> Result<(), TranslateError> {
    if table.lowers.len() > 16 {
        return Err(TranslateError::TooManyBounds { name: name.to_string(), what: "lower" });
    }
    if table.uppers.len() > 16 {
        return Err(TranslateError::TooManyBounds { name: name.to_string(), what: "upper" });
    }
    Ok(())
}

// Names for the fresh clocks: one per lower bound, then one per upper bound.
fn fresh_names(name: &str, table: &obligations::BoundTable) -> Vec<String> {
    table
        .lowers
        .iter()
        .map(|b| format!("z[{name}{b}]"))
        .chain(table.uppers.iter().map(|b| format!("z[{name}{b}]")))
        .collect()
}

fn stats(
    name: &str,
    kind: EventKind,
    input: &Automaton,
    output: &Automaton,
    table: &obligations::BoundTable,
    state_bound: u128,
    expected_clocks: usize,
) -> StepStats {
    StepStats {
        clock: name.to_string(),
        kind,
        states_in: input.states.len(),
        clocks_in: input.clocks.len(),
        lower_bounds: table.lowers.len(),
        upper_bounds: table.uppers.len(),
        states_out: output.states.len(),
        clocks_out: output.clocks.len(),
        state_bound,
        expected_clocks,
        max_constant_in: input.max_constant(),
        max_constant_out: output.max_constant(),
    }
}

use serde::{Deserialize, Serialize};

use crate::model::Automaton;
use crate::words::EventKind;

use super::{remove_clock, StepStats, TranslateError, TranslateOptions};

/// Summary of a full event-clock removal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub states_in: usize,
    pub clocks_in: usize,
    pub event_clocks_in: usize,
    pub event_atoms_in: usize,
    pub states_out: usize,
    pub clocks_out: usize,
    pub max_constant_in: u32,
    pub max_constant_out: u32,
    pub steps: Vec<StepStats>,
}

impl PipelineStats {
    pub fn bounds_ok(&self) -> bool {
        self.steps.iter().all(|s| s.states_ok() && s.clocks_ok())
    }

    pub fn max_constant_ok(&self) -> bool {
        self.max_constant_in == self.max_constant_out && self.steps.iter().all(|s| s.max_constant_ok())
    }

    /// Output states per input state.
    pub fn blowup(&self) -> f64 {
        self.states_out as f64 / self.states_in.max(1) as f64
    }
}

const ORDER: [EventKind; 4] = [
    EventKind::GlobalRecorder,
    EventKind::GlobalPredictor,
    EventKind::AbsRecorder,
    EventKind::AbsPredictor,
];

/// Removes every event clock: global recorders, then global predictors,
/// abstract recorders and abstract predictors, each in declaration order.
pub fn remove_all_event_clocks(
    a: &Automaton,
    opts: TranslateOptions,
) -> Result<(Automaton, PipelineStats), TranslateError> {
    let mut cur = a.clone();
    let mut steps = Vec::new();
    for kind in ORDER {
        // clock ids shift after each removal, so look the next one up by name
        let names: Vec<String> = cur
            .event_clocks()
            .filter(|(_, e)| e.kind == kind)
            .map(|(id, _)| cur.clocks[id as usize].name.clone())
            .collect();
        for name in names {
            let id = cur.clock_id(&name).expect("clock still present");
            let (next, st) = remove_clock(&cur, id, opts)?;
            steps.push(st);
            cur = next;
        }
    }
    let stats = PipelineStats {
        states_in: a.states.len(),
        clocks_in: a.clocks.len(),
        event_clocks_in: a.event_clocks().count(),
        event_atoms_in: a.event_atom_count(),
        states_out: cur.states.len(),
        clocks_out: cur.clocks.len(),
        max_constant_in: a.max_constant(),
        max_constant_out: cur.max_constant(),
        steps,
    };
    Ok((cur, stats))
}

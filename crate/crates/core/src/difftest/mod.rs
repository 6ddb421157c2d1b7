//! Differential testing of event-clock removal.
//!
//! Every case draws an automaton and a batch of words from its own seeded
//! stream, then compares acceptance before and after removal of all event
//! clocks and of each clock on its own. Cases run in parallel; the report
//! is ordered by case index and identical for identical configurations.

mod gen;
mod shrink;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::accepts;
use crate::format::{upword_to_dto, AutomatonDto, UpWordDto};
use crate::model::Automaton;
use crate::translate::{
    remove_all_event_clocks, remove_clock_named, StepStats, TranslateError, TranslateOptions,
};
use crate::words::{EventKind, UpWord};

pub use gen::{gen_automaton, gen_up_word};
pub use shrink::shrink;

use crate::translate::Mutation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub max_states: usize,
    pub max_props: usize,
    pub max_constant: u32,
    /// Kinds event clocks are drawn from.
    pub clock_menu: Vec<EventKind>,
    /// Event clocks per automaton.
    pub event_clocks: usize,
    pub cases: usize,
    pub words_per_case: usize,
    pub prefix_len: usize,
    pub period_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    /// Reduce the first mismatch to a smaller failing case.
    pub shrink: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_states: 5,
            max_props: 2,
            max_constant: 3,
            clock_menu: EventKind::ALL.to_vec(),
            event_clocks: 1,
            cases: 200,
            words_per_case: 50,
            prefix_len: 6,
            period_len: 6,
            mutation: None,
            shrink: true,
        }
    }
}

impl GenConfig {
    /// Configuration drawing only clocks of `kind`.
    pub fn for_kind(kind: EventKind) -> Self {
        GenConfig { clock_menu: vec![kind], ..GenConfig::default() }
    }

    /// Configuration mixing two clocks from every kind.
    pub fn mixed() -> Self {
        GenConfig { event_clocks: 2, ..GenConfig::default() }
    }
}

/// Which removal produced the compared automaton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Removal {
    All,
    Clock(String),
}

impl fmt::Display for Removal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Removal::All => f.write_str("all event clocks"),
            Removal::Clock(c) => write!(f, "clock {c}"),
        }
    }
}

impl Removal {
    fn apply(&self, a: &Automaton, opts: TranslateOptions) -> Result<Automaton, TranslateError> {
        match self {
            Removal::All => remove_all_event_clocks(a, opts).map(|r| r.0),
            Removal::Clock(c) => remove_clock_named(a, c, opts).map(|r| r.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub case: usize,
    pub removal: Removal,
    pub automaton: AutomatonDto,
    pub word: UpWordDto,
    pub original: bool,
    pub translated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrunkCase {
    pub case: usize,
    pub removal: Removal,
    pub automaton: AutomatonDto,
    pub word: UpWordDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepViolation {
    pub case: usize,
    pub step: StepStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseError {
    pub case: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: GenConfig,
    pub cases: usize,
    pub comparisons: usize,
    /// Words accepted by the original automata.
    pub accepted: usize,
    pub steps: usize,
    pub max_states_out: usize,
    pub mismatches: Vec<Mismatch>,
    pub bound_violations: Vec<StepViolation>,
    pub constant_violations: Vec<StepViolation>,
    pub errors: Vec<CaseError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrunk: Option<ShrunkCase>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
            && self.bound_violations.is_empty()
            && self.constant_violations.is_empty()
            && self.errors.is_empty()
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let menu: Vec<&str> = self.config.clock_menu.iter().map(|k| k.as_str()).collect();
        let mut s = format!(
            "seed {} menu [{}] x{}{}: {} cases, {} comparisons ({} accepted), {} removal steps, largest output {} states\n",
            self.config.seed,
            menu.join(","),
            self.config.event_clocks,
            self.config.mutation.map(|m| format!(" mutation {m}")).unwrap_or_default(),
            self.cases,
            self.comparisons,
            self.accepted,
            self.steps,
            self.max_states_out,
        );
        s += &format!(
            "mismatches {}, bound violations {}, constant violations {}, errors {}\n",
            self.mismatches.len(),
            self.bound_violations.len(),
            self.constant_violations.len(),
            self.errors.len()
        );
        for m in self.mismatches.iter().take(5) {
            s += &format!(
                "  case {} ({}): original {} translated {}\n",
                m.case, m.removal, m.original, m.translated
            );
        }
        for v in self.bound_violations.iter().chain(&self.constant_violations).take(5) {
            let st = &v.step;
            s += &format!(
                "  case {} clock {}: states {}/{} clocks {}/{} constant {}->{}\n",
                v.case,
                st.clock,
                st.states_out,
                st.state_bound,
                st.clocks_out,
                st.expected_clocks,
                st.max_constant_in,
                st.max_constant_out
            );
        }
        for e in self.errors.iter().take(5) {
            s += &format!("  case {}: {}\n", e.case, e.message);
        }
        if let Some(c) = &self.shrunk {
            s += &format!(
                "  shrunk case {}: {} states, {} transitions, {}+{} letters\n",
                c.case,
                c.automaton.states.len(),
                c.automaton.transitions.len(),
                c.word.prefix.len(),
                c.word.period.len()
            );
        }
        s.pop();
        s
    }
}

/// Random stream of case `index`.
pub fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// The automaton and words of case `index`.
pub fn gen_case(cfg: &GenConfig, index: usize) -> (Automaton, Vec<UpWord>) {
    let mut rng = case_rng(cfg.seed, index);
    let a = gen_automaton(cfg, &mut rng);
    let words = (0..cfg.words_per_case).map(|_| gen_up_word(cfg, a.props.len(), &mut rng)).collect();
    (a, words)
}

#[derive(Default)]
struct CaseResult {
    comparisons: usize,
    accepted: usize,
    steps: usize,
    max_states_out: usize,
    mismatches: Vec<Mismatch>,
    bound_violations: Vec<StepViolation>,
    constant_violations: Vec<StepViolation>,
    errors: Vec<CaseError>,
}

fn run_case(cfg: &GenConfig, case: usize) -> CaseResult {
    let opts = TranslateOptions { mutation: cfg.mutation };
    let (a, words) = gen_case(cfg, case);
    let mut r = CaseResult::default();
    let error = |r: &mut CaseResult, message: String| r.errors.push(CaseError { case, message });

    let mut outputs = Vec::new();
    match remove_all_event_clocks(&a, opts) {
        Ok((out, stats)) => {
            for step in stats.steps {
                record_step(&mut r, case, step);
            }
            outputs.push((Removal::All, out));
        }
        Err(e) => error(&mut r, e.to_string()),
    }
    // with a single event clock the full removal is the single removal
    if a.event_clocks().count() > 1 {
        for (id, _) in a.event_clocks() {
            let name = a.clocks[id as usize].name.clone();
            match remove_clock_named(&a, &name, opts) {
                Ok((out, step)) => {
                    record_step(&mut r, case, step);
                    outputs.push((Removal::Clock(name), out));
                }
                Err(e) => error(&mut r, e.to_string()),
            }
        }
    }
    for out in &outputs {
        r.max_states_out = r.max_states_out.max(out.1.states.len());
    }

    for w in &words {
        let original = match accepts(&a, w) {
            Ok(v) => v,
            Err(e) => {
                error(&mut r, e.to_string());
                continue;
            }
        };
        r.accepted += usize::from(original);
        for (removal, out) in &outputs {
            r.comparisons += 1;
            match accepts(out, w) {
                Ok(translated) if translated != original => r.mismatches.push(Mismatch {
                    case,
                    removal: removal.clone(),
                    automaton: AutomatonDto::from(&a),
                    word: upword_to_dto(w, &a.props),
                    original,
                    translated,
                }),
                Ok(_) => {}
                Err(e) => error(&mut r, e.to_string()),
            }
        }
    }
    r
}

fn record_step(r: &mut CaseResult, case: usize, step: StepStats) {
    r.steps += 1;
    if !step.states_ok() || !step.clocks_ok() {
        r.bound_violations.push(StepViolation { case, step: step.clone() });
    }
    if !step.max_constant_ok() {
        r.constant_violations.push(StepViolation { case, step });
    }
}

/// Whether `a` and its translation disagree on `w`.
pub fn still_mismatches(a: &Automaton, w: &UpWord, removal: &Removal, opts: TranslateOptions) -> bool {
    let Ok(out) = removal.apply(a, opts) else {
        return false;
    };
    matches!((accepts(a, w), accepts(&out, w)), (Ok(x), Ok(y)) if x != y)
}

/// Runs `cfg.cases` cases and collects every disagreement and violated bound.
pub fn difftest(cfg: &GenConfig) -> Report {
    let results: Vec<CaseResult> = (0..cfg.cases).into_par_iter().map(|i| run_case(cfg, i)).collect();
    let mut report = Report {
        config: cfg.clone(),
        cases: cfg.cases,
        comparisons: 0,
        accepted: 0,
        steps: 0,
        max_states_out: 0,
        mismatches: Vec::new(),
        bound_violations: Vec::new(),
        constant_violations: Vec::new(),
        errors: Vec::new(),
        shrunk: None,
    };
    for r in results {
        report.comparisons += r.comparisons;
        report.accepted += r.accepted;
        report.steps += r.steps;
        report.max_states_out = report.max_states_out.max(r.max_states_out);
        report.mismatches.extend(r.mismatches);
        report.bound_violations.extend(r.bound_violations);
        report.constant_violations.extend(r.constant_violations);
        report.errors.extend(r.errors);
    }
    if cfg.shrink {
        report.shrunk = report.mismatches.first().and_then(|m| shrink_mismatch(cfg, m));
    }
    report
}

fn shrink_mismatch(cfg: &GenConfig, m: &Mismatch) -> Option<ShrunkCase> {
    let opts = TranslateOptions { mutation: cfg.mutation };
    let a = Automaton::try_from(&m.automaton).ok()?;
    let w = crate::format::upword_from_dto(&m.word, &a.props).ok()?;
    let (a2, w2) = shrink(&a, &w, |a, w| still_mismatches(a, w, &m.removal, opts));
    Some(ShrunkCase {
        case: m.case,
        removal: m.removal.clone(),
        automaton: AutomatonDto::from(&a2),
        word: upword_to_dto(&w2, &a2.props),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: EventKind) -> GenConfig {
        GenConfig { cases: 6, words_per_case: 6, ..GenConfig::for_kind(kind) }
    }

    #[test]
    fn report_is_reproducible() {
        let cfg = small(EventKind::AbsPredictor);
        let a = serde_json::to_string(&difftest(&cfg)).unwrap();
        let b = serde_json::to_string(&difftest(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn automata_without_event_clocks_never_mismatch() {
        let cfg = GenConfig { event_clocks: 0, ..small(EventKind::GlobalRecorder) };
        let r = difftest(&cfg);
        assert!(r.passed(), "{}", r.summary());
        assert_eq!(r.comparisons, cfg.cases * cfg.words_per_case);
    }

    #[test]
    fn small_runs_of_every_kind_pass() {
        for kind in EventKind::ALL {
            let r = difftest(&small(kind));
            assert!(r.passed(), "{}", r.summary());
        }
        let r = difftest(&GenConfig { cases: 6, words_per_case: 6, ..GenConfig::mixed() });
        assert!(r.passed(), "{}", r.summary());
    }
}

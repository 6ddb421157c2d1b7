//! Command-line front end.
//!
//! Exit codes: 0 for success or acceptance, 1 for a semantic negative
//! (rejection, mismatch, violated bound, invalid automaton), 2 for usage
//! and format errors.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::difftest::{difftest, GenConfig};
use crate::engine::{accepts, trace, Configuration, EngineError};
use crate::format::{
    automaton_from_json, automaton_to_json, parse_document, rebase_upword, rebase_word,
    to_document, upword_from_dto, word_from_dto, AutomatonDto, Document, FormatError, Kind,
    UpWordDto, WordDto,
};
use crate::model::{validate, Automaton};
use crate::translate::{
    remove_all_event_clocks, remove_clock_named, Mutation, StepStats, TranslateError,
    TranslateOptions,
};
use crate::words::{EventKind, Tag, TimedNestedWord};

/// Overrides `--seed` of `difftest`.
pub const SEED_VAR: &str = "ECKIT_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{SEED_VAR} is not an unsigned integer: `{0}`")]
    Seed(String),
}

#[derive(Debug, Parser)]
#[command(name = "eckit", version, about = "Event-clock removal for nested visibly pushdown timed automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove one event clock, or all of them.
    Translate(TranslateArgs),
    /// Decide whether an automaton accepts an ultimately periodic word.
    Member { automaton: PathBuf, word: PathBuf },
    /// Dump the configurations reached along a finite word.
    Run(RunArgs),
    /// Compare original and translated automata on random inputs.
    Difftest(DifftestArgs),
    /// Print size figures of an automaton.
    Stats { automaton: PathBuf },
    /// Check that a document parses and is well formed.
    Validate { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    pub input: PathBuf,
    /// Name of the event clock to remove.
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    pub clock: Option<String>,
    /// Remove every event clock.
    #[arg(long)]
    pub all: bool,
    /// Output file for the translated automaton; standard output if absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Output file for the stats block; standard error if absent.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_parser = parse_mutation, hide = true)]
    pub mutation: Option<Mutation>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub automaton: PathBuf,
    /// A `word` document, or an `upword` document to unroll.
    pub word: PathBuf,
    /// Period copies appended when unrolling an `upword`.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
}

#[derive(Debug, Args)]
pub struct DifftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    /// Words per automaton.
    #[arg(long, default_value_t = 50)]
    pub words: usize,
    /// Event-clock kind to draw from; repeat for several. All kinds if absent.
    #[arg(long = "kind", value_parser = parse_kind)]
    pub kinds: Vec<EventKind>,
    #[arg(long, default_value_t = 1)]
    pub event_clocks: usize,
    #[arg(long, default_value_t = 5)]
    pub max_states: usize,
    #[arg(long, default_value_t = 2)]
    pub max_props: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_constant: u32,
    #[arg(long, default_value_t = 6)]
    pub prefix_len: usize,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub period_len: u64,
    /// Inject a construction fault into abstract predictor removal.
    #[arg(long, value_parser = parse_mutation)]
    pub mutation: Option<Mutation>,
    #[arg(long)]
    pub no_shrink: bool,
    /// Output file for the report document.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<EventKind, String> {
    EventKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
        let names: Vec<&str> = EventKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    Mutation::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
        let names: Vec<&str> = Mutation::ALL.iter().map(|m| m.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// The seed to use: `env` when set, `flag` otherwise.
pub fn effective_seed(flag: u64, env: Option<&str>) -> Result<u64, CliError> {
    match env {
        Some(v) => v.trim().parse().map_err(|_| CliError::Seed(v.to_string())),
        None => Ok(flag),
    }
}

impl DifftestArgs {
    pub fn config(&self, env_seed: Option<&str>) -> Result<GenConfig, CliError> {
        Ok(GenConfig {
            seed: effective_seed(self.seed, env_seed)?,
            max_states: self.max_states.max(1),
            max_props: self.max_props.max(1),
            max_constant: self.max_constant,
            clock_menu: if self.kinds.is_empty() { EventKind::ALL.to_vec() } else { self.kinds.clone() },
            event_clocks: self.event_clocks,
            cases: self.cases,
            words_per_case: self.words,
            prefix_len: self.prefix_len,
            period_len: self.period_len as usize,
            mutation: self.mutation,
            shrink: !self.no_shrink,
        })
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Positive,
    Negative,
}

impl From<bool> for Outcome {
    fn from(ok: bool) -> Self {
        if ok {
            Outcome::Positive
        } else {
            Outcome::Negative
        }
    }
}

/// Parses the process arguments, runs the command and maps the result to
/// an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Translate(args) => cmd_translate(args),
        Command::Member { automaton, word } => cmd_member(automaton, word),
        Command::Run(args) => cmd_run(args),
        Command::Difftest(args) => {
            let env = std::env::var(SEED_VAR).ok();
            cmd_difftest(args, env.as_deref())
        }
        Command::Stats { automaton } => cmd_stats(automaton),
        Command::Validate { file } => cmd_validate(file),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn in_file<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Format { path: path.into(), source })
}

fn load_automaton(path: &Path) -> Result<Automaton, CliError> {
    in_file(path, automaton_from_json(&read(path)?))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

/// Stats block written by `translate`.
#[derive(Debug, Clone, Serialize)]
pub struct TranslateStats {
    pub states_in: usize,
    pub clocks_in: usize,
    pub event_clocks_in: usize,
    pub states_out: usize,
    pub clocks_out: usize,
    pub transitions_out: usize,
    pub max_constant_in: u32,
    pub max_constant_out: u32,
    pub bounds_ok: bool,
    pub max_constant_ok: bool,
    pub steps: Vec<StepStats>,
}

fn cmd_translate(args: &TranslateArgs) -> Result<Outcome, CliError> {
    let a = load_automaton(&args.input)?;
    let opts = TranslateOptions { mutation: args.mutation };
    let (out, steps) = match &args.clock {
        Some(name) if !args.all => {
            let (out, st) = remove_clock_named(&a, name, opts)?;
            (out, vec![st])
        }
        _ => {
            let (out, st) = remove_all_event_clocks(&a, opts)?;
            (out, st.steps)
        }
    };
    let stats = TranslateStats {
        states_in: a.states.len(),
        clocks_in: a.clocks.len(),
        event_clocks_in: a.event_clocks().count(),
        states_out: out.states.len(),
        clocks_out: out.clocks.len(),
        transitions_out: out.transitions.len(),
        max_constant_in: a.max_constant(),
        max_constant_out: out.max_constant(),
        bounds_ok: steps.iter().all(|s| s.states_ok() && s.clocks_ok()),
        max_constant_ok: a.max_constant() == out.max_constant()
            && steps.iter().all(|s| s.max_constant_ok()),
        steps,
    };
    let doc = automaton_to_json(&out);
    match &args.output {
        Some(p) => write(p, &doc)?,
        None => println!("{doc}"),
    }
    match &args.stats {
        Some(p) => write(p, &to_json(&stats))?,
        None => eprintln!("{}", to_json(&stats)),
    }
    Ok((stats.bounds_ok && stats.max_constant_ok).into())
}

fn cmd_member(automaton: &Path, word: &Path) -> Result<Outcome, CliError> {
    let a = load_automaton(automaton)?;
    let (w, props) = in_file(word, crate::format::upword_from_json(&read(word)?))?;
    let w = in_file(word, rebase_upword(&w, &props, &a.props))?;
    let verdict = accepts(&a, &w)?;
    println!("{}", if verdict { "ACCEPT" } else { "REJECT" });
    Ok(verdict.into())
}

fn load_finite_word(path: &Path, props: &[String], copies: usize) -> Result<TimedNestedWord, CliError> {
    let text = read(path)?;
    let doc: Document = in_file(path, serde_json::from_str(&text).map_err(FormatError::from))?;
    if doc.kind == Kind::Upword {
        let doc = in_file(path, parse_document(&text, Kind::Upword))?;
        let dto: UpWordDto = in_file(path, serde_json::from_value(doc.payload).map_err(FormatError::from))?;
        let w = in_file(path, upword_from_dto(&dto, &dto.props))?;
        let w = in_file(path, rebase_upword(&w, &dto.props, props))?;
        return Ok(w.unroll(copies));
    }
    let doc = in_file(path, parse_document(&text, Kind::Word))?;
    let dto: WordDto = in_file(path, serde_json::from_value(doc.payload).map_err(FormatError::from))?;
    let w = in_file(path, word_from_dto(&dto, &dto.props))?;
    in_file(path, rebase_word(&w, &dto.props, props))
}

fn render_config(a: &Automaton, c: &Configuration) -> String {
    let mut s = a.states[c.state as usize].clone();
    let stack: Vec<&str> = c.stack.iter().map(|&g| a.stack_symbols[g as usize].as_str()).collect();
    let _ = write!(s, " [{}]", stack.join(" "));
    for (&x, v) in &c.valuation {
        let _ = write!(s, " {}={}", a.clocks[x as usize].name, v);
    }
    s
}

fn cmd_run(args: &RunArgs) -> Result<Outcome, CliError> {
    let a = load_automaton(&args.automaton)?;
    let w = load_finite_word(&args.word, &a.props, args.copies)?;
    let steps = trace(&a, &w)?;
    for (i, set) in steps.iter().enumerate() {
        if i == 0 {
            println!("start");
        } else {
            let sym = w.symbol(i - 1);
            let props: Vec<&str> = sym.props.iter().map(|p| a.props[p].as_str()).collect();
            let tag = match sym.tag {
                Tag::Call => "call",
                Tag::Ret => "ret",
                Tag::Int => "int",
            };
            println!("{} {tag} {{{}}} @{}", i - 1, props.join(","), w.time(i - 1));
        }
        for c in set {
            println!("  {}", render_config(&a, c));
        }
    }
    Ok((!steps.last().expect("initial set").is_empty()).into())
}

fn cmd_difftest(args: &DifftestArgs, env_seed: Option<&str>) -> Result<Outcome, CliError> {
    let cfg = args.config(env_seed)?;
    let report = difftest(&cfg);
    println!("{}", report.summary());
    if let Some(p) = &args.output {
        write(p, &to_json(&to_document(Kind::Report, &report)))?;
    }
    Ok(report.passed().into())
}

/// Size figures printed by `stats`.
#[derive(Debug, Clone, Serialize)]
pub struct AutomatonStats {
    pub states: usize,
    pub initial: usize,
    pub transitions: usize,
    pub stack_symbols: usize,
    pub props: usize,
    pub normal_clocks: usize,
    pub event_clocks: Vec<EventClockStats>,
    pub event_atoms: usize,
    pub acceptance_components: usize,
    pub max_constant: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventClockStats {
    pub name: String,
    pub kind: EventKind,
    pub prop: String,
}

pub fn automaton_stats(a: &Automaton) -> AutomatonStats {
    AutomatonStats {
        states: a.states.len(),
        initial: a.initial.len(),
        transitions: a.transitions.len(),
        stack_symbols: a.stack_symbols.len(),
        props: a.props.len(),
        normal_clocks: a.normal_clocks().count(),
        event_clocks: a
            .event_clocks()
            .map(|(id, e)| EventClockStats {
                name: a.clocks[id as usize].name.clone(),
                kind: e.kind,
                prop: a.props[e.prop].clone(),
            })
            .collect(),
        event_atoms: a.event_atom_count(),
        acceptance_components: a.acceptance.len(),
        max_constant: a.max_constant(),
    }
}

fn cmd_stats(path: &Path) -> Result<Outcome, CliError> {
    let a = load_automaton(path)?;
    println!("{}", to_json(&automaton_stats(&a)));
    Ok(Outcome::Positive)
}

fn cmd_validate(path: &Path) -> Result<Outcome, CliError> {
    let text = read(path)?;
    let doc: Document = in_file(path, serde_json::from_str(&text).map_err(FormatError::from))?;
    let doc = in_file(path, parse_document(&text, doc.kind))?;
    let payload = doc.payload;
    let parsed = |e: serde_json::Error| CliError::Format { path: path.into(), source: e.into() };
    match doc.kind {
        Kind::Automaton => {
            let dto: AutomatonDto = serde_json::from_value(payload).map_err(parsed)?;
            match Automaton::try_from(&dto) {
                Ok(a) => {
                    debug_assert!(validate(&a).is_empty());
                    println!("valid automaton: {} states, {} transitions", a.states.len(), a.transitions.len());
                    Ok(Outcome::Positive)
                }
                Err(FormatError::Invalid(violations)) => {
                    for v in violations {
                        println!("{v}");
                    }
                    Ok(Outcome::Negative)
                }
                Err(source) => Err(CliError::Format { path: path.into(), source }),
            }
        }
        Kind::Word => {
            let dto: WordDto = serde_json::from_value(payload).map_err(parsed)?;
            let w = in_file(path, word_from_dto(&dto, &dto.props))?;
            println!("valid word: {} letters", w.len());
            Ok(Outcome::Positive)
        }
        Kind::Upword => {
            let dto: UpWordDto = serde_json::from_value(payload).map_err(parsed)?;
            let w = in_file(path, upword_from_dto(&dto, &dto.props))?;
            println!("valid upword: prefix {} letters, period {} letters", w.prefix().len(), w.period().len());
            Ok(Outcome::Positive)
        }
        Kind::Report => {
            let r: crate::difftest::Report = serde_json::from_value(payload).map_err(parsed)?;
            println!("valid report: {}", r.summary());
            Ok(Outcome::Positive)
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn env_seed_overrides_flag() {
        assert_eq!(effective_seed(3, None).unwrap(), 3);
        assert_eq!(effective_seed(3, Some("17")).unwrap(), 17);
        assert!(matches!(effective_seed(3, Some("x")), Err(CliError::Seed(_))));
    }

    #[test]
    fn difftest_flags_build_the_config() {
        let cli = Cli::try_parse_from([
            "eckit", "difftest", "--seed", "7", "--cases", "1", "--kind", "abs_predictor",
            "--mutation", "drop-bad-branch",
        ])
        .unwrap();
        let Command::Difftest(args) = cli.command else { panic!("wrong subcommand") };
        let cfg = args.config(None).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.cases, 1);
        assert_eq!(cfg.clock_menu, vec![EventKind::AbsPredictor]);
        assert_eq!(cfg.mutation, Some(Mutation::DropBadBranch));
    }

    #[test]
    fn translate_needs_a_clock_or_all() {
        assert!(Cli::try_parse_from(["eckit", "translate", "a.json"]).is_err());
        assert!(Cli::try_parse_from(["eckit", "translate", "a.json", "--all", "--clock", "y"]).is_err());
        assert!(Cli::try_parse_from(["eckit", "translate", "a.json", "--clock", "y"]).is_ok());
    }
}

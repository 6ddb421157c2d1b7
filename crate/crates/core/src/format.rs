//! JSON interchange documents.
//!
//! Every file is a [`Document`] `{"kind", "version", "payload"}`. Rationals
//! are `{"num", "den"}` pairs, bounds are `{"op", "value"}` with `value` an
//! integer or `"inf"`, and a NULL check is `{"null": true}`. States, clocks,
//! stack symbols and propositions are referenced by name.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate, Atom, AtomBody, Automaton, Clock, ClockKind, Interval, LowerBound, StackAction,
    StackTop, Transition, UpperBound, Violation,
};
use crate::words::{
    EventClock, EventKind, PropSet, Symbol, Tag, TimedLetter, TimedNestedWord, UpWord, WordError,
};
use crate::Rational;

pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a `{expected}` document, found `{found}`")]
    WrongKind { expected: &'static str, found: String },
    #[error("unsupported document version {0}")]
    Version(u32),
    #[error("unknown {what} `{name}`")]
    UnknownName { what: &'static str, name: String },
    #[error("bad bound operator `{op}` for a {side} bound")]
    BadOperator { op: String, side: &'static str },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid automaton: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("invalid word: {0}")]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Automaton,
    Word,
    Upword,
    Report,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Automaton => "automaton",
            Kind::Word => "word",
            Kind::Upword => "upword",
            Kind::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub kind: Kind,
    pub version: u32,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalDto {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for RationalDto {
    fn from(r: Rational) -> Self {
        RationalDto { num: *r.numer(), den: *r.denom() }
    }
}

impl TryFrom<RationalDto> for Rational {
    type Error = FormatError;

    fn try_from(r: RationalDto) -> Result<Self, FormatError> {
        if r.den.is_zero() {
            return Err(FormatError::ZeroDenominator);
        }
        Ok(Rational::new(r.num, r.den))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum BoundValue {
    Finite(u32),
    Infinite(Infinity),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundDto {
    op: String,
    value: BoundValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomDto {
    Null { clock: String, null: bool },
    Interval { clock: String, lower: BoundDto, upper: BoundDto },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ActionDto {
    Push { symbol: String },
    Pop { symbol: String },
    PopBottom,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolDto {
    pub tag: Tag,
    pub props: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockDto {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prop: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDto {
    pub source: String,
    pub symbol: SymbolDto,
    #[serde(default)]
    pub guard: Vec<AtomDto>,
    #[serde(default)]
    pub resets: Vec<String>,
    pub action: ActionDto,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDto {
    pub props: Vec<String>,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub clocks: Vec<ClockDto>,
    #[serde(default)]
    pub stack_symbols: Vec<String>,
    pub transitions: Vec<TransitionDto>,
    #[serde(default)]
    pub acceptance: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterDto {
    pub tag: Tag,
    pub props: Vec<String>,
    pub time: RationalDto,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordDto {
    pub props: Vec<String>,
    pub letters: Vec<LetterDto>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpWordDto {
    pub props: Vec<String>,
    pub prefix: Vec<LetterDto>,
    pub period: Vec<LetterDto>,
    pub period_duration: RationalDto,
}

fn lookup(names: &HashMap<&str, u32>, what: &'static str, name: &str) -> Result<u32, FormatError> {
    names
        .get(name)
        .copied()
        .ok_or_else(|| FormatError::UnknownName { what, name: name.to_string() })
}

fn index(names: &[String]) -> HashMap<&str, u32> {
    names.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect()
}

fn lower_dto(b: LowerBound) -> BoundDto {
    BoundDto { op: if b.strict { ">" } else { ">=" }.into(), value: BoundValue::Finite(b.value) }
}

fn upper_dto(b: UpperBound) -> BoundDto {
    BoundDto {
        op: if b.strict { "<" } else { "<=" }.into(),
        value: match b.value {
            Some(v) => BoundValue::Finite(v),
            None => BoundValue::Infinite(Infinity::Inf),
        },
    }
}

fn lower_from(b: &BoundDto) -> Result<LowerBound, FormatError> {
    let bad = || FormatError::BadOperator { op: b.op.clone(), side: "lower" };
    let strict = match b.op.as_str() {
        ">" => true,
        ">=" => false,
        _ => return Err(bad()),
    };
    match b.value {
        BoundValue::Finite(value) => Ok(LowerBound { strict, value }),
        BoundValue::Infinite(_) => Err(bad()),
    }
}

fn upper_from(b: &BoundDto) -> Result<UpperBound, FormatError> {
    let strict = match b.op.as_str() {
        "<" => true,
        "<=" => false,
        _ => return Err(FormatError::BadOperator { op: b.op.clone(), side: "upper" }),
    };
    Ok(match b.value {
        BoundValue::Finite(v) => UpperBound { strict, value: Some(v) },
        BoundValue::Infinite(_) => UpperBound::INFINITY,
    })
}

fn props_to_names(props: PropSet, names: &[String]) -> Vec<String> {
    props.iter().map(|p| names[p].clone()).collect()
}

fn props_from_names(names: &[String], props: &HashMap<&str, u32>) -> Result<PropSet, FormatError> {
    names
        .iter()
        .map(|n| lookup(props, "proposition", n).map(|p| p as usize))
        .collect()
}

impl From<&Automaton> for AutomatonDto {
    fn from(a: &Automaton) -> Self {
        let state = |q: u32| a.states[q as usize].clone();
        let clock = |c: u32| a.clocks[c as usize].name.clone();
        AutomatonDto {
            props: a.props.clone(),
            states: a.states.clone(),
            initial: a.initial.iter().map(|&q| state(q)).collect(),
            clocks: a
                .clocks
                .iter()
                .map(|c| match c.kind {
                    ClockKind::Normal => ClockDto { name: c.name.clone(), kind: "normal".into(), prop: None },
                    ClockKind::Event(e) => ClockDto {
                        name: c.name.clone(),
                        kind: e.kind.as_str().into(),
                        prop: Some(a.props[e.prop].clone()),
                    },
                })
                .collect(),
            stack_symbols: a.stack_symbols.clone(),
            transitions: a
                .transitions
                .iter()
                .map(|t| TransitionDto {
                    source: state(t.source),
                    symbol: SymbolDto { tag: t.symbol.tag, props: props_to_names(t.symbol.props, &a.props) },
                    guard: t
                        .guard
                        .iter()
                        .map(|at| match at.body {
                            AtomBody::Null => AtomDto::Null { clock: clock(at.clock), null: true },
                            AtomBody::Interval(i) => AtomDto::Interval {
                                clock: clock(at.clock),
                                lower: lower_dto(i.lower),
                                upper: upper_dto(i.upper),
                            },
                        })
                        .collect(),
                    resets: t.resets.iter().map(|&c| clock(c)).collect(),
                    action: match t.action {
                        StackAction::Push(g) => ActionDto::Push { symbol: a.stack_symbols[g as usize].clone() },
                        StackAction::Pop(StackTop::Symbol(g)) => {
                            ActionDto::Pop { symbol: a.stack_symbols[g as usize].clone() }
                        }
                        StackAction::Pop(StackTop::Bottom) => ActionDto::PopBottom,
                        StackAction::Internal => ActionDto::Internal,
                    },
                    target: state(t.target),
                })
                .collect(),
            acceptance: a
                .acceptance
                .iter()
                .map(|f| f.iter().map(|&q| state(q)).collect())
                .collect(),
        }
    }
}

impl TryFrom<&AutomatonDto> for Automaton {
    type Error = FormatError;

    fn try_from(d: &AutomatonDto) -> Result<Self, FormatError> {
        let props = index(&d.props);
        let states = index(&d.states);
        let syms = index(&d.stack_symbols);
        let clock_names: Vec<String> = d.clocks.iter().map(|c| c.name.clone()).collect();
        let clocks_ix = index(&clock_names);
        let mut clocks = Vec::with_capacity(d.clocks.len());
        for c in &d.clocks {
            let kind = match c.kind.as_str() {
                "normal" => ClockKind::Normal,
                other => {
                    let kind = EventKind::ALL
                        .into_iter()
                        .find(|k| k.as_str() == other)
                        .ok_or_else(|| FormatError::UnknownName { what: "clock kind", name: other.into() })?;
                    let prop_name = c.prop.as_deref().ok_or_else(|| FormatError::UnknownName {
                        what: "proposition of clock",
                        name: c.name.clone(),
                    })?;
                    let prop = lookup(&props, "proposition", prop_name)? as usize;
                    ClockKind::Event(EventClock { kind, prop })
                }
            };
            clocks.push(Clock { name: c.name.clone(), kind });
        }
        let mut transitions = Vec::with_capacity(d.transitions.len());
        for t in &d.transitions {
            let mut guard = Vec::with_capacity(t.guard.len());
            for at in &t.guard {
                guard.push(match at {
                    AtomDto::Null { clock, .. } => Atom::null(lookup(&clocks_ix, "clock", clock)?),
                    AtomDto::Interval { clock, lower, upper } => Atom::interval(
                        lookup(&clocks_ix, "clock", clock)?,
                        Interval::new(lower_from(lower)?, upper_from(upper)?),
                    ),
                });
            }
            let action = match &t.action {
                ActionDto::Push { symbol } => StackAction::Push(lookup(&syms, "stack symbol", symbol)?),
                ActionDto::Pop { symbol } => {
                    StackAction::Pop(StackTop::Symbol(lookup(&syms, "stack symbol", symbol)?))
                }
                ActionDto::PopBottom => StackAction::Pop(StackTop::Bottom),
                ActionDto::Internal => StackAction::Internal,
            };
            transitions.push(Transition {
                source: lookup(&states, "state", &t.source)?,
                symbol: Symbol::new(t.symbol.tag, props_from_names(&t.symbol.props, &props)?),
                guard,
                resets: t
                    .resets
                    .iter()
                    .map(|c| lookup(&clocks_ix, "clock", c))
                    .collect::<Result<_, _>>()?,
                action,
                target: lookup(&states, "state", &t.target)?,
            });
        }
        let a = Automaton {
            props: d.props.clone(),
            states: d.states.clone(),
            initial: d
                .initial
                .iter()
                .map(|q| lookup(&states, "state", q))
                .collect::<Result<_, _>>()?,
            clocks,
            stack_symbols: d.stack_symbols.clone(),
            transitions,
            acceptance: d
                .acceptance
                .iter()
                .map(|f| f.iter().map(|q| lookup(&states, "state", q)).collect())
                .collect::<Result<_, _>>()?,
        };
        let violations = validate(&a);
        if !violations.is_empty() {
            return Err(FormatError::Invalid(violations));
        }
        Ok(a)
    }
}

fn letters_to_dto(w: &TimedNestedWord, props: &[String]) -> Vec<LetterDto> {
    w.letters()
        .iter()
        .map(|l| LetterDto {
            tag: l.symbol.tag,
            props: props_to_names(l.symbol.props, props),
            time: l.time.into(),
        })
        .collect()
}

fn letters_from_dto(
    letters: &[LetterDto],
    props: &HashMap<&str, u32>,
) -> Result<TimedNestedWord, FormatError> {
    let letters = letters
        .iter()
        .map(|l| {
            Ok(TimedLetter {
                symbol: Symbol::new(l.tag, props_from_names(&l.props, props)?),
                time: l.time.try_into()?,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(TimedNestedWord::new(letters)?)
}

pub fn word_to_dto(w: &TimedNestedWord, props: &[String]) -> WordDto {
    WordDto { props: props.to_vec(), letters: letters_to_dto(w, props) }
}

/// The word with proposition names resolved against `props`.
pub fn word_from_dto(d: &WordDto, props: &[String]) -> Result<TimedNestedWord, FormatError> {
    check_props(&d.props, props)?;
    letters_from_dto(&d.letters, &index(props))
}

pub fn upword_to_dto(w: &UpWord, props: &[String]) -> UpWordDto {
    UpWordDto {
        props: props.to_vec(),
        prefix: letters_to_dto(w.prefix(), props),
        period: letters_to_dto(w.period(), props),
        period_duration: w.period_duration().into(),
    }
}

/// The word with proposition names resolved against `props`.
pub fn upword_from_dto(d: &UpWordDto, props: &[String]) -> Result<UpWord, FormatError> {
    check_props(&d.props, props)?;
    let ix = index(props);
    Ok(UpWord::new(
        letters_from_dto(&d.prefix, &ix)?,
        letters_from_dto(&d.period, &ix)?,
        d.period_duration.try_into()?,
    )?)
}

fn check_props(declared: &[String], known: &[String]) -> Result<(), FormatError> {
    match declared.iter().find(|p| !known.contains(p)) {
        Some(p) => Err(FormatError::UnknownName { what: "proposition", name: p.clone() }),
        None => Ok(()),
    }
}

pub fn to_document<T: Serialize>(kind: Kind, payload: &T) -> Document {
    Document {
        kind,
        version: VERSION,
        payload: serde_json::to_value(payload).expect("payload serializes"),
    }
}

pub fn parse_document(text: &str, expected: Kind) -> Result<Document, FormatError> {
    let doc: Document = serde_json::from_str(text)?;
    if doc.kind != expected {
        return Err(FormatError::WrongKind { expected: expected.as_str(), found: doc.kind.as_str().into() });
    }
    if doc.version != VERSION {
        return Err(FormatError::Version(doc.version));
    }
    Ok(doc)
}

pub fn automaton_to_json(a: &Automaton) -> String {
    serde_json::to_string_pretty(&to_document(Kind::Automaton, &AutomatonDto::from(a)))
        .expect("document serializes")
}

pub fn automaton_from_json(text: &str) -> Result<Automaton, FormatError> {
    let doc = parse_document(text, Kind::Automaton)?;
    let dto: AutomatonDto = serde_json::from_value(doc.payload)?;
    Automaton::try_from(&dto)
}

pub fn upword_to_json(w: &UpWord, props: &[String]) -> String {
    serde_json::to_string_pretty(&to_document(Kind::Upword, &upword_to_dto(w, props)))
        .expect("document serializes")
}

/// Parses an ultimately periodic word; returns it with its declared
/// proposition names.
pub fn upword_from_json(text: &str) -> Result<(UpWord, Vec<String>), FormatError> {
    let doc = parse_document(text, Kind::Upword)?;
    let dto: UpWordDto = serde_json::from_value(doc.payload)?;
    let w = upword_from_dto(&dto, &dto.props)?;
    Ok((w, dto.props))
}

pub fn word_to_json(w: &TimedNestedWord, props: &[String]) -> String {
    serde_json::to_string_pretty(&to_document(Kind::Word, &word_to_dto(w, props)))
        .expect("document serializes")
}

pub fn word_from_json(text: &str) -> Result<(TimedNestedWord, Vec<String>), FormatError> {
    let doc = parse_document(text, Kind::Word)?;
    let dto: WordDto = serde_json::from_value(doc.payload)?;
    let w = word_from_dto(&dto, &dto.props)?;
    Ok((w, dto.props))
}

/// Renames the propositions of `w` from `from` to their positions in `to`.
pub fn rebase_props(symbol: Symbol, from: &[String], to: &[String]) -> Result<Symbol, FormatError> {
    let mut props = PropSet::EMPTY;
    for p in symbol.props.iter() {
        let name = &from[p];
        let i = to
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| FormatError::UnknownName { what: "proposition", name: name.clone() })?;
        props.insert(i);
    }
    Ok(Symbol { props, tag: symbol.tag })
}

/// `w` with propositions renumbered from the `from` list to the `to` list.
pub fn rebase_upword(w: &UpWord, from: &[String], to: &[String]) -> Result<UpWord, FormatError> {
    let conv = |word: &TimedNestedWord| -> Result<TimedNestedWord, FormatError> {
        let letters = word
            .letters()
            .iter()
            .map(|l| Ok(TimedLetter { symbol: rebase_props(l.symbol, from, to)?, time: l.time }))
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(TimedNestedWord::new(letters)?)
    };
    Ok(UpWord::new(conv(w.prefix())?, conv(w.period())?, w.period_duration())?)
}

/// `w` with propositions renumbered from the `from` list to the `to` list.
pub fn rebase_word(
    w: &TimedNestedWord,
    from: &[String],
    to: &[String],
) -> Result<TimedNestedWord, FormatError> {
    let letters = w
        .letters()
        .iter()
        .map(|l| Ok(TimedLetter { symbol: rebase_props(l.symbol, from, to)?, time: l.time }))
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(TimedNestedWord::new(letters)?)
}

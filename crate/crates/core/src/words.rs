//! Timed nested words, their matching relation, maximal abstract paths
//! (MAPs) and event-clock valuations.
//!
//! Positions of an ultimately periodic word `u·v^ω` are numbered on the
//! infinite unrolling: `0..|u|` is the prefix, copy `k` of the period
//! occupies `|u| + k·|v| .. |u| + (k+1)·|v|`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

/// Index of an atomic proposition in an automaton's proposition list.
pub type Prop = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("position {pos} is out of bounds (length {len})")]
    OutOfBounds { pos: usize, len: usize },
    #[error("position {pos} is not a call")]
    NotACall { pos: usize },
    #[error("negative timestamp at position {pos}")]
    NegativeTime { pos: usize },
    #[error("timestamp decreases at position {pos}")]
    DecreasingTime { pos: usize },
    #[error("the period is empty")]
    EmptyPeriod,
    #[error("the period is not well-matched (position {pos})")]
    PeriodNotWellMatched { pos: usize },
    #[error("the period duration must be positive")]
    NonPositiveDuration,
    #[error("period letters do not fit inside one period duration")]
    PeriodTooLong,
    #[error("proposition index {0} exceeds the supported maximum of 63")]
    PropTooLarge(usize),
    #[error("event-clock valuation did not stabilize within {copies} period copies")]
    Unstable { copies: usize },
}

/// Call/return/internal tag of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Call,
    Ret,
    Int,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::Call, Tag::Ret, Tag::Int];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Call => "call",
            Tag::Ret => "ret",
            Tag::Int => "int",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finite set of propositions, stored as a bit mask (at most 64 propositions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PropSet(u64);

impl PropSet {
    pub const EMPTY: PropSet = PropSet(0);

    pub fn from_bits(bits: u64) -> Self {
        PropSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(p: Prop) -> Self {
        assert!(p < 64, "proposition index {p} out of range");
        PropSet(1 << p)
    }

    pub fn contains(self, p: Prop) -> bool {
        p < 64 && self.0 & (1 << p) != 0
    }

    pub fn insert(&mut self, p: Prop) {
        assert!(p < 64, "proposition index {p} out of range");
        self.0 |= 1 << p;
    }

    pub fn iter(self) -> impl Iterator<Item = Prop> {
        (0..64).filter(move |&p| self.0 & (1 << p) != 0)
    }
}

impl FromIterator<Prop> for PropSet {
    fn from_iter<I: IntoIterator<Item = Prop>>(iter: I) -> Self {
        let mut s = PropSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

/// An input symbol: a set of propositions plus exactly one tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub props: PropSet,
    pub tag: Tag,
}

impl Symbol {
    pub fn new(tag: Tag, props: PropSet) -> Self {
        Symbol { props, tag }
    }

    pub fn call(props: PropSet) -> Self {
        Symbol::new(Tag::Call, props)
    }

    pub fn ret(props: PropSet) -> Self {
        Symbol::new(Tag::Ret, props)
    }

    pub fn int(props: PropSet) -> Self {
        Symbol::new(Tag::Int, props)
    }

    pub fn has(self, p: Prop) -> bool {
        self.props.contains(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    GlobalRecorder,
    GlobalPredictor,
    AbsRecorder,
    AbsPredictor,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::GlobalRecorder,
        EventKind::GlobalPredictor,
        EventKind::AbsRecorder,
        EventKind::AbsPredictor,
    ];

    pub fn is_predictor(self) -> bool {
        matches!(self, EventKind::GlobalPredictor | EventKind::AbsPredictor)
    }

    pub fn is_abstract(self) -> bool {
        matches!(self, EventKind::AbsRecorder | EventKind::AbsPredictor)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::GlobalRecorder => "global_recorder",
            EventKind::GlobalPredictor => "global_predictor",
            EventKind::AbsRecorder => "abs_recorder",
            EventKind::AbsPredictor => "abs_predictor",
        }
    }
}

/// An event clock `x_p`, `y_p`, `x^abs_p` or `y^abs_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventClock {
    pub kind: EventKind,
    pub prop: Prop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedLetter {
    pub symbol: Symbol,
    pub time: Rational,
}

/// A finite timed nested word with its matching relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedNestedWord {
    letters: Vec<TimedLetter>,
    // matching return of a call / matching call of a return
    partner: Vec<Option<usize>>,
}

impl TimedNestedWord {
    pub fn new(letters: Vec<TimedLetter>) -> Result<Self, WordError> {
        for (pos, l) in letters.iter().enumerate() {
            if l.time.is_negative() {
                return Err(WordError::NegativeTime { pos });
            }
            if pos > 0 && l.time < letters[pos - 1].time {
                return Err(WordError::DecreasingTime { pos });
            }
        }
        let partner = match_positions(letters.iter().map(|l| l.symbol.tag));
        Ok(TimedNestedWord { letters, partner })
    }

    pub fn empty() -> Self {
        TimedNestedWord { letters: Vec::new(), partner: Vec::new() }
    }

    pub fn letters(&self) -> &[TimedLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        self.letters[i].symbol
    }

    pub fn time(&self, i: usize) -> Rational {
        self.letters[i].time
    }

    fn check(&self, i: usize) -> Result<(), WordError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(WordError::OutOfBounds { pos: i, len: self.len() })
        }
    }

    /// True iff every call is matched by a return in the word and vice versa.
    pub fn is_well_matched(&self) -> bool {
        self.letters
            .iter()
            .zip(&self.partner)
            .all(|(l, m)| l.symbol.tag == Tag::Int || m.is_some())
    }

    pub fn matching_return(&self, i: usize) -> Result<Option<usize>, WordError> {
        self.check(i)?;
        if self.letters[i].symbol.tag != Tag::Call {
            return Err(WordError::NotACall { pos: i });
        }
        Ok(self.partner[i])
    }

    /// Matching call of a return position, if any.
    pub fn matching_call(&self, i: usize) -> Option<usize> {
        match self.letters.get(i)?.symbol.tag {
            Tag::Ret => self.partner[i],
            _ => None,
        }
    }

    pub fn abstract_successor(&self, i: usize) -> Result<Option<usize>, WordError> {
        self.check(i)?;
        Ok(self.succ(i))
    }

    fn succ(&self, i: usize) -> Option<usize> {
        match self.letters[i].symbol.tag {
            Tag::Call => self.partner[i],
            Tag::Ret | Tag::Int => {
                let next = i + 1;
                (next < self.len() && self.letters[next].symbol.tag != Tag::Ret).then_some(next)
            }
        }
    }

    fn pred(&self, j: usize) -> Option<usize> {
        let l = &self.letters[j];
        if l.symbol.tag == Tag::Ret {
            return self.partner[j];
        }
        if j == 0 {
            return None;
        }
        match self.letters[j - 1].symbol.tag {
            Tag::Call => None,
            _ => Some(j - 1),
        }
    }

    /// First position of the MAP visiting `i`.
    pub fn map_start(&self, i: usize) -> Result<usize, WordError> {
        self.check(i)?;
        let mut j = i;
        while let Some(k) = self.pred(j) {
            j = k;
        }
        Ok(j)
    }

    pub fn map_of(&self, i: usize) -> Result<MapView, WordError> {
        let mut j = self.map_start(i)?;
        let mut positions = vec![j];
        while let Some(k) = self.succ(j) {
            positions.push(k);
            j = k;
        }
        Ok(MapView { positions, is_infinite: false })
    }

    /// Identifier of the MAP of every position (the MAP's first position).
    pub fn map_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.len()];
        for j in 0..self.len() {
            ids[j] = match self.pred(j) {
                Some(k) => ids[k],
                None => j,
            };
        }
        ids
    }

    pub fn p_infinity(&self, i: usize) -> Result<bool, WordError> {
        let start = self.map_start(i)?;
        Ok(!(start > 0
            && self.letters[start - 1].symbol.tag == Tag::Call
            && self.partner[start - 1].is_some()))
    }

    pub fn eventually_abs_p(&self, i: usize, p: Prop) -> Result<bool, WordError> {
        self.check(i)?;
        let mut j = Some(i);
        while let Some(k) = j {
            if self.letters[k].symbol.has(p) {
                return Ok(true);
            }
            j = self.succ(k);
        }
        Ok(false)
    }

    pub fn event_clock_value(
        &self,
        i: usize,
        clock: EventClock,
    ) -> Result<Option<Rational>, WordError> {
        self.check(i)?;
        Ok(self.event_values(clock)[i])
    }

    /// Value of an event clock at every position of the word.
    pub fn event_values(&self, clock: EventClock) -> Vec<Option<Rational>> {
        let n = self.len();
        let p = clock.prop;
        let has = |j: usize| self.letters[j].symbol.has(p);
        let mut out = vec![None; n];
        match clock.kind {
            EventKind::GlobalRecorder => {
                let mut last: Option<usize> = None;
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot = last.map(|j| self.time(i) - self.time(j));
                    if has(i) {
                        last = Some(i);
                    }
                }
            }
            EventKind::GlobalPredictor => {
                let mut next: Option<usize> = None;
                for i in (0..n).rev() {
                    out[i] = next.map(|j| self.time(j) - self.time(i));
                    if has(i) {
                        next = Some(i);
                    }
                }
            }
            EventKind::AbsRecorder => {
                let ids = self.map_ids();
                let mut last = vec![None::<usize>; n];
                for i in 0..n {
                    let id = ids[i];
                    out[i] = last[id].map(|j| self.time(i) - self.time(j));
                    if has(i) {
                        last[id] = Some(i);
                    }
                }
            }
            EventKind::AbsPredictor => {
                let ids = self.map_ids();
                let mut next = vec![None::<usize>; n];
                for i in (0..n).rev() {
                    let id = ids[i];
                    out[i] = next[id].map(|j| self.time(j) - self.time(i));
                    if has(i) {
                        next[id] = Some(i);
                    }
                }
            }
        }
        out
    }
}

/// Standard nesting discipline: a return matches the latest pending call.
fn match_positions(tags: impl Iterator<Item = Tag>) -> Vec<Option<usize>> {
    let mut partner = Vec::new();
    let mut pending = Vec::new();
    for (i, tag) in tags.enumerate() {
        partner.push(None);
        match tag {
            Tag::Call => pending.push(i),
            Tag::Ret => {
                if let Some(c) = pending.pop() {
                    partner[c] = Some(i);
                    partner[i] = Some(c);
                }
            }
            Tag::Int => {}
        }
    }
    partner
}

/// One maximal abstract path. For infinite MAPs of an [`UpWord`] only the
/// positions inside the inspected window are listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapView {
    pub positions: Vec<usize>,
    pub is_infinite: bool,
}

impl MapView {
    pub fn contains(&self, i: usize) -> bool {
        self.positions.binary_search(&i).is_ok()
    }
}

/// An ultimately periodic timed nested word `prefix · period^ω`.
///
/// Copy `k` of the period is shifted by `k · period_duration`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpWord {
    prefix: TimedNestedWord,
    period: TimedNestedWord,
    period_duration: Rational,
}

impl UpWord {
    pub fn new(
        prefix: TimedNestedWord,
        period: TimedNestedWord,
        period_duration: Rational,
    ) -> Result<Self, WordError> {
        if period.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        if let Some(pos) = (0..period.len())
            .find(|&i| period.symbol(i).tag != Tag::Int && period.partner[i].is_none())
        {
            return Err(WordError::PeriodNotWellMatched { pos });
        }
        if !period_duration.is_positive() {
            return Err(WordError::NonPositiveDuration);
        }
        let first = period.time(0);
        let last = period.time(period.len() - 1);
        if let Some(l) = prefix.letters().last() {
            if first < l.time {
                return Err(WordError::DecreasingTime { pos: prefix.len() });
            }
        }
        if last > first + period_duration {
            return Err(WordError::PeriodTooLong);
        }
        Ok(UpWord { prefix, period, period_duration })
    }

    pub fn prefix(&self) -> &TimedNestedWord {
        &self.prefix
    }

    pub fn period(&self) -> &TimedNestedWord {
        &self.period
    }

    pub fn period_duration(&self) -> Rational {
        self.period_duration
    }

    /// Copy index of a position, `None` for prefix positions.
    pub fn copy_of(&self, i: usize) -> Option<usize> {
        i.checked_sub(self.prefix.len()).map(|k| k / self.period.len())
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        match i.checked_sub(self.prefix.len()) {
            None => self.prefix.symbol(i),
            Some(k) => self.period.symbol(k % self.period.len()),
        }
    }

    pub fn time(&self, i: usize) -> Rational {
        match i.checked_sub(self.prefix.len()) {
            None => self.prefix.time(i),
            Some(k) => {
                let copy = (k / self.period.len()) as i64;
                self.period.time(k % self.period.len()) + self.period_duration * copy
            }
        }
    }

    /// Finite word made of the prefix followed by `copies` period copies.
    pub fn unroll(&self, copies: usize) -> TimedNestedWord {
        let n = self.prefix.len() + copies * self.period.len();
        let letters = (0..n)
            .map(|i| TimedLetter { symbol: self.symbol(i), time: self.time(i) })
            .collect();
        TimedNestedWord::new(letters).expect("unrolling preserves word invariants")
    }

    // unrolled window large enough that position `i` and everything it can
    // see ahead along its MAP are inside
    fn window(&self, i: usize) -> TimedNestedWord {
        let copies = self.copy_of(i).map_or(0, |c| c + 1) + 2;
        self.unroll(copies)
    }

    pub fn matching_return(&self, i: usize) -> Result<Option<usize>, WordError> {
        self.window(i).matching_return(i)
    }

    pub fn abstract_successor(&self, i: usize) -> Result<Option<usize>, WordError> {
        self.window(i).abstract_successor(i)
    }

    /// The MAP visiting `i`; positions are listed up to one full copy past `i`.
    pub fn map_of(&self, i: usize) -> Result<MapView, WordError> {
        let w = self.window(i);
        let mut view = w.map_of(i)?;
        let next_copy = self.copy_of(i).map_or(0, |c| c + 1);
        // the depth-0 chain of the periodic part is the only infinite MAP and
        // it contains the first letter of every copy
        view.is_infinite = view.contains(self.prefix.len() + next_copy * self.period.len());
        Ok(view)
    }

    pub fn p_infinity(&self, i: usize) -> Result<bool, WordError> {
        self.window(i).p_infinity(i)
    }

    pub fn eventually_abs_p(&self, i: usize, p: Prop) -> Result<bool, WordError> {
        self.window(i).eventually_abs_p(i, p)
    }

    /// Exact event-clock value at position `i` of the infinite unrolling.
    pub fn event_clock_value(
        &self,
        i: usize,
        clock: EventClock,
    ) -> Result<Option<Rational>, WordError> {
        // fails loudly if the valuation is not eventually periodic
        self.stabilized(&[clock], Rational::from_integer(1))?;
        self.window(i).event_clock_value(i, clock)
    }

    /// Event-clock values capped at `cap`, unrolled until the per-copy value
    /// pattern repeats.
    ///
    /// Returns values for the prefix followed by copies `0..=s`, where copy
    /// `s ≥ 1` is the first copy from which every later copy carries the same
    /// capped pattern.
    pub fn stabilized(
        &self,
        clocks: &[EventClock],
        cap: Rational,
    ) -> Result<StableTrace, WordError> {
        let n = self.period.len();
        let m = self.prefix.len();
        let per_copy = (cap / self.period_duration).ceil().to_integer().max(0) as usize;
        let copies = per_copy + 4;
        // one extra copy so predictors of copy `copies` see their next p
        let w = self.unroll(copies + 2);
        let capped = |v: Option<Rational>| v.map(|v| if v > cap { cap } else { v });
        let columns: Vec<Vec<Option<Rational>>> = clocks
            .iter()
            .map(|&c| w.event_values(c).into_iter().map(capped).collect())
            .collect();
        let pattern = |copy: usize| -> Vec<Option<Rational>> {
            let base = m + copy * n;
            (base..base + n)
                .flat_map(|i| columns.iter().map(move |col| col[i]))
                .collect()
        };
        let patterns: Vec<_> = (0..=copies).map(pattern).collect();
        let stable = (1..copies)
            .find(|&s| patterns[s..].iter().all(|p| *p == patterns[s]))
            .ok_or(WordError::Unstable { copies })?;
        let len = m + (stable + 1) * n;
        let mut gaps = Vec::with_capacity(len);
        let mut values = Vec::with_capacity(len);
        let mut letters = Vec::with_capacity(len);
        for i in 0..len {
            let prev = if i == 0 { Rational::zero() } else { w.time(i - 1) };
            gaps.push(w.time(i) - prev);
            letters.push(w.symbol(i));
            values.push(columns.iter().map(|col| col[i]).collect());
        }
        Ok(StableTrace { letters, gaps, values, loop_start: m + stable * n, period_len: n })
    }
}

/// Symbols, time gaps and capped event-clock values of an [`UpWord`] up to
/// and including the first copy from which the trace repeats forever.
#[derive(Debug, Clone)]
pub struct StableTrace {
    pub letters: Vec<Symbol>,
    /// Time elapsed before each position (from time 0 for position 0).
    pub gaps: Vec<Rational>,
    /// `values[i][c]`: value of the `c`-th requested clock at position `i`.
    pub values: Vec<Vec<Option<Rational>>>,
    /// First position of the repeating copy.
    pub loop_start: usize,
    pub period_len: usize,
}

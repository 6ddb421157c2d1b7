//! Obligation sets, check sets and the abstract-successor step used by the
//! abstract predictor removal.

use std::fmt;

use thiserror::Error;

use crate::model::{Atom, AtomBody, Automaton, ClockConstraint, ClockId, LowerBound, UpperBound};
use crate::words::{Prop, Symbol, Tag};

use super::Mutation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("a NULL constraint has no bounds")]
    NullConstraint,
}

/// Splits `y ∈ I` into its lower-bound and upper-bound constraints.
pub fn to_bounds(body: AtomBody) -> Result<(LowerBound, UpperBound), BoundsError> {
    match body {
        AtomBody::Null => Err(BoundsError::NullConstraint),
        AtomBody::Interval(i) => Ok((i.lower, i.upper)),
    }
}

/// Distinct non-trivial bounds used by the atoms on one event clock.
///
/// `≥ 0` and `< ∞` hold for every defined value, so they get neither a
/// clock nor an obligation. Obligation sets hold at most 16 bounds of each
/// kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundTable {
    pub lowers: Vec<LowerBound>,
    pub uppers: Vec<UpperBound>,
}

/// The prediction a transition makes on the removed clock, with bounds
/// resolved to indices into a [`BoundTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prediction {
    Null,
    Bounds { lower: Option<u8>, upper: Option<u8> },
}

impl BoundTable {
    pub fn for_clock(a: &Automaton, clock: ClockId) -> Self {
        let mut table = BoundTable::default();
        for atom in a.transitions.iter().flat_map(|t| &t.guard) {
            if atom.clock != clock {
                continue;
            }
            if let AtomBody::Interval(i) = atom.body {
                if !i.lower.is_trivial() && !table.lowers.contains(&i.lower) {
                    table.lowers.push(i.lower);
                }
                if !i.upper.is_trivial() && !table.uppers.contains(&i.upper) {
                    table.uppers.push(i.upper);
                }
            }
        }
        table.lowers.sort();
        table.uppers.sort();
        table
    }

    pub fn prediction(&self, body: AtomBody) -> Prediction {
        match body {
            AtomBody::Null => Prediction::Null,
            AtomBody::Interval(i) => Prediction::Bounds {
                lower: self.lowers.iter().position(|&b| b == i.lower).map(|x| x as u8),
                upper: self.uppers.iter().position(|&b| b == i.upper).map(|x| x as u8),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.lowers.len() + self.uppers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    First,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    Lower(LowerBound),
    Upper(Flag, UpperBound),
}

/// Pending lower-bound and upper-bound obligations, as bit sets over the
/// indices of a [`BoundTable`]. An upper bound carries at most one flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ObligationSet {
    lower: u16,
    first: u16,
    live: u16,
}

impl ObligationSet {
    pub const EMPTY: ObligationSet = ObligationSet { lower: 0, first: 0, live: 0 };

    pub fn from_obligations(table: &BoundTable, obligations: &[Obligation]) -> Self {
        let mut o = ObligationSet::EMPTY;
        for ob in obligations {
            match *ob {
                Obligation::Lower(b) => {
                    let i = table.lowers.iter().position(|&x| x == b).expect("unknown lower bound");
                    o.lower |= 1 << i;
                }
                Obligation::Upper(f, b) => {
                    let i = table.uppers.iter().position(|&x| x == b).expect("unknown upper bound");
                    o = o.with_upper(i as u8, f);
                }
            }
        }
        o
    }

    pub fn obligations(&self, table: &BoundTable) -> Vec<Obligation> {
        let mut out: Vec<Obligation> = table
            .lowers
            .iter()
            .enumerate()
            .filter(|(i, _)| self.lower & (1 << i) != 0)
            .map(|(_, &b)| Obligation::Lower(b))
            .collect();
        for (i, &b) in table.uppers.iter().enumerate() {
            if let Some(f) = self.upper(i as u8) {
                out.push(Obligation::Upper(f, b));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        *self == ObligationSet::EMPTY
    }

    pub fn has_lower(&self, i: u8) -> bool {
        self.lower & (1 << i) != 0
    }

    pub fn upper(&self, i: u8) -> Option<Flag> {
        if self.first & (1 << i) != 0 {
            Some(Flag::First)
        } else if self.live & (1 << i) != 0 {
            Some(Flag::Live)
        } else {
            None
        }
    }

    pub fn with_lower(mut self, i: u8) -> Self {
        self.lower |= 1 << i;
        self
    }

    pub fn with_upper(mut self, i: u8, flag: Flag) -> Self {
        self.first &= !(1 << i);
        self.live &= !(1 << i);
        match flag {
            Flag::First => self.first |= 1 << i,
            Flag::Live => self.live |= 1 << i,
        }
        self
    }

    /// Keeps only the live upper-bound obligations.
    pub fn live(self) -> Self {
        ObligationSet { lower: 0, first: 0, live: self.live }
    }

    /// Obligations handed to a called MAP: every upper bound becomes live.
    pub fn called(self) -> Self {
        ObligationSet { lower: 0, first: 0, live: self.first | self.live }
    }

    pub fn lower_bits(&self) -> u16 {
        self.lower
    }

    pub fn upper_bits(&self) -> u16 {
        self.first | self.live
    }

    pub fn fmt_with(&self, table: &BoundTable) -> String {
        let parts: Vec<String> = self
            .obligations(table)
            .into_iter()
            .map(|o| match o {
                Obligation::Lower(b) => b.to_string(),
                Obligation::Upper(Flag::First, b) => format!("f{b}"),
                Obligation::Upper(Flag::Live, b) => format!("l{b}"),
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

pub fn live(o: ObligationSet) -> ObligationSet {
    o.live()
}

/// Fresh normal clocks replacing the removed event clock, one per bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewClocks {
    pub lower: Vec<ClockId>,
    pub upper: Vec<ClockId>,
}

/// Checks due when `p` occurs: `true` if `o` is empty or `p ∉ a`, otherwise
/// `z_{≻ℓ} ≻ ℓ` and `z_{≺u} ≺ u` for every obligation.
pub fn con(
    o: ObligationSet,
    a: Symbol,
    p: Prop,
    table: &BoundTable,
    clocks: &NewClocks,
) -> ClockConstraint {
    if o.is_empty() || !a.has(p) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &b) in table.lowers.iter().enumerate() {
        if o.has_lower(i as u8) {
            out.push(Atom::lower(clocks.lower[i], b));
        }
    }
    for (i, &b) in table.uppers.iter().enumerate() {
        if o.upper(i as u8).is_some() {
            out.push(Atom::upper(clocks.upper[i], b));
        }
    }
    out
}

/// Whether the current position is a return, plus the `F^abs p` and `p_∞`
/// flags. Calls and internals are not told apart: every rule checks the
/// guess against the symbol read and none treats them differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CheckSet {
    pub at_return: bool,
    /// `F^abs p`: the current MAP visits `p` at this position or later.
    pub ev: bool,
    pub pinf: bool,
}

impl CheckSet {
    pub fn new(at_return: bool, ev: bool, pinf: bool) -> Self {
        CheckSet { at_return, ev, pinf }
    }

    pub fn all() -> impl Iterator<Item = CheckSet> {
        (0..8u8).map(|bits| CheckSet::new(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0))
    }

    pub fn matches(&self, a: Symbol) -> bool {
        self.at_return == (a.tag == Tag::Ret)
    }
}

impl fmt::Display for CheckSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.at_return { "[ret" } else { "[-" })?;
        if self.ev {
            f.write_str(",F")?;
        }
        if self.pinf {
            f.write_str(",inf")?;
        }
        f.write_str("]")
    }
}

/// Result of one abstract step: clocks to reset and the obligation set and
/// flags for the abstract successor. Whether the successor is a return is left
/// to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbsOutcome {
    pub reset_lower: Option<u8>,
    pub reset_upper: Option<u8>,
    pub next: ObligationSet,
    pub next_ev: bool,
    pub next_pinf: bool,
}

/// Deterministic reading of the abstract-step predicate: `None` when no
/// successor `(O', K')` is consistent with `(O, K)`, the symbol and the
/// prediction.
pub fn abs_step(
    o: ObligationSet,
    k: CheckSet,
    a: Symbol,
    pred: Prediction,
    p: Prop,
    mutation: Option<Mutation>,
) -> Option<AbsOutcome> {
    if !k.matches(a) {
        return None;
    }
    let has_p = a.has(p);
    let next_ev = pred != Prediction::Null;
    if k.ev != (has_p || next_ev) {
        return None;
    }
    match pred {
        Prediction::Null => {
            if !has_p && o != o.live() {
                return None;
            }
            Some(AbsOutcome {
                reset_lower: None,
                reset_upper: None,
                next: o.live(),
                next_ev,
                next_pinf: k.pinf,
            })
        }
        Prediction::Bounds { lower, upper } => {
            let kept = if has_p { o.live() } else { o };
            let mut next = kept;
            let mut reset_lower = None;
            if let Some(l) = lower {
                let skip = mutation == Some(Mutation::SkipLowerReset) && kept.has_lower(l);
                if !skip {
                    reset_lower = Some(l);
                }
                next = next.with_lower(l);
            }
            let mut reset_upper = None;
            if let Some(u) = upper {
                let flag = if kept.upper(u) == Some(Flag::Live) { Flag::Live } else { Flag::First };
                next = next.with_upper(u, flag);
                let reset = match o.upper(u) {
                    None => true,
                    Some(Flag::First) => has_p || mutation == Some(Mutation::AllowUpperReReset),
                    Some(Flag::Live) => false,
                };
                if reset {
                    reset_upper = Some(u);
                }
            }
            Some(AbsOutcome { reset_lower, reset_upper, next, next_ev, next_pinf: k.pinf })
        }
    }
}

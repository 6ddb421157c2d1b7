//! Independent reference implementations and random inputs shared by the
//! integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use eckit::words::{EventClock, EventKind, Prop, PropSet, Symbol, Tag, TimedLetter, TimedNestedWord};
use eckit::Rational;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A random finite word: up to `max_len` letters over `n_props` props, times
/// with denominators up to 4.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize, n_props: usize) -> TimedNestedWord {
    let mut t = Rational::from_integer(0);
    let letters = (0..rng.gen_range(0..=max_len))
        .map(|_| {
            t += Rational::new(rng.gen_range(0..=8), rng.gen_range(1..=4));
            let tag = [Tag::Call, Tag::Ret, Tag::Int][rng.gen_range(0..3)];
            let props = PropSet::from_bits(rng.gen_range(0..1u64 << n_props));
            TimedLetter { symbol: Symbol::new(tag, props), time: t }
        })
        .collect();
    TimedNestedWord::new(letters).expect("non-decreasing times")
}

pub fn tags(w: &TimedNestedWord) -> Vec<Tag> {
    w.letters().iter().map(|l| l.symbol.tag).collect()
}

/// Matching return of every call by a left-to-right stack scan.
pub fn stack_scan_matching(tags: &[Tag]) -> Vec<Option<usize>> {
    let mut partner = vec![None; tags.len()];
    let mut open = Vec::new();
    for (j, tag) in tags.iter().enumerate() {
        match tag {
            Tag::Call => open.push(j),
            Tag::Ret => {
                if let Some(c) = open.pop() {
                    partner[c] = Some(j);
                }
            }
            Tag::Int => {}
        }
    }
    partner
}

/// Abstract successor straight from its definition.
pub fn successor_oracle(tags: &[Tag], partner: &[Option<usize>], i: usize) -> Option<usize> {
    match tags[i] {
        Tag::Call => partner[i],
        _ if i + 1 < tags.len() && tags[i + 1] != Tag::Ret => Some(i + 1),
        _ => None,
    }
}

/// Every MAP as a chain: starts are the positions no successor points to.
pub fn map_chains(tags: &[Tag]) -> Vec<Vec<usize>> {
    let partner = stack_scan_matching(tags);
    let succ: Vec<Option<usize>> = (0..tags.len()).map(|i| successor_oracle(tags, &partner, i)).collect();
    let mut has_pred = vec![false; tags.len()];
    for s in succ.iter().flatten() {
        has_pred[*s] = true;
    }
    (0..tags.len())
        .filter(|&i| !has_pred[i])
        .map(|start| {
            let mut chain = vec![start];
            let mut j = start;
            while let Some(k) = succ[j] {
                chain.push(k);
                j = k;
            }
            chain
        })
        .collect()
}

pub fn chain_of(chains: &[Vec<usize>], i: usize) -> &Vec<usize> {
    chains.iter().find(|c| c.contains(&i)).expect("every position is on a chain")
}

/// Event-clock value at `i` by scanning the word or the MAP of `i`.
pub fn event_value_oracle(
    w: &TimedNestedWord,
    chains: &[Vec<usize>],
    i: usize,
    clock: EventClock,
) -> Option<Rational> {
    let has = |j: usize| w.symbol(j).has(clock.prop);
    let scope: Vec<usize> = if clock.kind.is_abstract() {
        chain_of(chains, i).clone()
    } else {
        (0..w.len()).collect()
    };
    if clock.kind.is_predictor() {
        scope.iter().find(|&&j| j > i && has(j)).map(|&j| w.time(j) - w.time(i))
    } else {
        scope.iter().rev().find(|&&j| j < i && has(j)).map(|&j| w.time(i) - w.time(j))
    }
}

pub fn all_clocks(n_props: usize) -> Vec<EventClock> {
    EventKind::ALL
        .into_iter()
        .flat_map(|kind| (0..n_props).map(move |prop: Prop| EventClock { kind, prop }))
        .collect()
}

//! Greedy reduction of mismatching cases.

use crate::model::Automaton;
use crate::words::{Tag, TimedLetter, TimedNestedWord, UpWord};

/// Shrinks `(a, w)` while `failing` keeps holding, by deleting transitions,
/// states and letters one at a time until no single deletion applies.
pub fn shrink(
    a: &Automaton,
    w: &UpWord,
    failing: impl Fn(&Automaton, &UpWord) -> bool,
) -> (Automaton, UpWord) {
    let mut a = a.clone();
    let mut w = w.clone();
    loop {
        let mut changed = false;
        for i in (0..a.transitions.len()).rev() {
            let mut b = a.clone();
            b.transitions.remove(i);
            if failing(&b, &w) {
                a = b;
                changed = true;
            }
        }
        for q in (0..a.states.len() as u32).rev() {
            if let Some(b) = without_state(&a, q) {
                if failing(&b, &w) {
                    a = b;
                    changed = true;
                }
            }
        }
        for v in word_deletions(&w) {
            if failing(&a, &v) {
                w = v;
                changed = true;
                break;
            }
        }
        if !changed {
            return (a, w);
        }
    }
}

fn without_state(a: &Automaton, q: u32) -> Option<Automaton> {
    if a.states.len() == 1 || a.initial == [q] {
        return None;
    }
    let renumber = |s: u32| if s > q { s - 1 } else { s };
    let mut b = a.clone();
    b.states.remove(q as usize);
    b.initial = a.initial.iter().filter(|&&s| s != q).map(|&s| renumber(s)).collect();
    b.transitions = a
        .transitions
        .iter()
        .filter(|t| t.source != q && t.target != q)
        .map(|t| {
            let mut t = t.clone();
            t.source = renumber(t.source);
            t.target = renumber(t.target);
            t
        })
        .collect();
    b.acceptance = a
        .acceptance
        .iter()
        .map(|f| f.iter().filter(|&&s| s != q).map(|&s| renumber(s)).collect())
        .collect();
    // a component emptied by the deletion would reject everything
    if b.acceptance.iter().any(|f: &Vec<u32>| f.is_empty()) {
        return None;
    }
    Some(b)
}

fn rebuild(letters: Vec<TimedLetter>) -> Option<TimedNestedWord> {
    TimedNestedWord::new(letters).ok()
}

// candidate words with one prefix letter, one internal period letter or one
// matched period pair removed
fn word_deletions(w: &UpWord) -> Vec<UpWord> {
    let mut out = Vec::new();
    let prefix = w.prefix().letters();
    let period = w.period().letters();
    for i in 0..prefix.len() {
        let mut p = prefix.to_vec();
        p.remove(i);
        if let Some(p) = rebuild(p) {
            if let Ok(v) = UpWord::new(p, w.period().clone(), w.period_duration()) {
                out.push(v);
            }
        }
    }
    if period.len() > 1 {
        for i in 0..period.len() {
            let drop: Vec<usize> = match period[i].symbol.tag {
                Tag::Int => vec![i],
                Tag::Call => match w.period().matching_return(i) {
                    Ok(Some(j)) => vec![i, j],
                    _ => continue,
                },
                Tag::Ret => continue,
            };
            let rest: Vec<TimedLetter> = period
                .iter()
                .enumerate()
                .filter(|(k, _)| !drop.contains(k))
                .map(|(_, l)| l.clone())
                .collect();
            if rest.is_empty() {
                continue;
            }
            if let Some(p) = rebuild(rest) {
                if let Ok(v) = UpWord::new(w.prefix().clone(), p, w.period_duration()) {
                    out.push(v);
                }
            }
        }
    }
    out
}

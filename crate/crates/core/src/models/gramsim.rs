//! Bounded bottom-up closure for grammars with integer effects.
//!
//! Computes, per nonterminal, the set of (word, accumulated effect) pairs
//! derivable within a word-length bound. Membership and enumeration read the
//! zero-effect entries of the start symbol. The closure caps per-coordinate
//! effect magnitude and total item count; a fired cap flips the result to
//! inexact.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::grammar::{Sym, ZGrammar};
use super::vec::SparseVec;
use super::{EnumResult, SimCaps, Tri};

type Items = BTreeMap<String, BTreeSet<(String, SparseVec)>>;

pub(crate) fn closure(g: &ZGrammar, max_len: usize, caps: &SimCaps) -> (Items, bool) {
    let mut items: Items = g
        .nonterminals
        .iter()
        .map(|n| (n.clone(), BTreeSet::new()))
        .collect();
    let mut exact = true;
    let mut total = 0usize;
    loop {
        let mut changed = false;
        for p in &g.productions {
            let mut combos: Vec<(String, SparseVec)> = Vec::new();
            expand(&p.rhs, 0, String::new(), p.effect.clone(), max_len, &items, &mut combos);
            for (word, effect) in combos {
                if effect.max_abs() > caps.max_counter {
                    exact = false;
                    continue;
                }
                if total >= caps.max_configs {
                    exact = false;
                    return (items, exact);
                }
                if items.get_mut(&p.lhs).unwrap().insert((word, effect)) {
                    total += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return (items, exact);
        }
    }
}

fn expand(
    rhs: &[Sym],
    i: usize,
    word: String,
    effect: SparseVec,
    max_len: usize,
    items: &Items,
    out: &mut Vec<(String, SparseVec)>,
) {
    if word.chars().count() > max_len {
        return;
    }
    if i == rhs.len() {
        out.push((word, effect));
        return;
    }
    match &rhs[i] {
        Sym::T(c) => {
            let mut w = word;
            w.push(*c);
            expand(rhs, i + 1, w, effect, max_len, items, out);
        }
        Sym::Nt(n) => {
            for (sub, sub_effect) in &items[n] {
                let mut w = word.clone();
                w.push_str(sub);
                let mut e = effect.clone();
                e.add_vec(sub_effect);
                expand(rhs, i + 1, w, e, max_len, items, out);
            }
        }
    }
}

pub(crate) fn accepts(g: &ZGrammar, word: &str, caps: &SimCaps) -> Tri {
    let (items, exact) = closure(g, word.chars().count(), caps);
    let hit = items
        .get(&g.start)
        .map(|set| set.contains(&(String::from(word), SparseVec::new())))
        .unwrap_or(false);
    if hit {
        Tri::Yes
    } else if exact {
        Tri::No
    } else {
        Tri::Unknown
    }
}

pub(crate) fn enumerate(g: &ZGrammar, max_len: usize, caps: &SimCaps) -> EnumResult {
    let (items, exact) = closure(g, max_len, caps);
    let words = items
        .get(&g.start)
        .map(|set| {
            set.iter()
                .filter(|(_, e)| e.is_zero())
                .map(|(w, _)| w.clone())
                .collect()
        })
        .unwrap_or_default();
    EnumResult {
        words,
        max_len,
        exact,
    }
}

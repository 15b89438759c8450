//! Model types and bounded-length language oracles.
//!
//! The simulators in this module are deliberately independent from the
//! conversion pipeline: they explore configurations directly and are used as
//! differential oracles against every conversion.

mod grammar;
mod gramsim;
mod machine;
mod sim;
mod tree;
mod validate;
mod vec;

pub use grammar::{Production, Sym, ZGrammar};
pub use machine::{
    CounterOp, Model, Prbca, PropFormula, Rbca, RbcaTransition, StackOp, ZPvass, ZTransition,
    ZVass, ZVassG, ZgTransition, ZpTransition,
};
pub use tree::DerivationTree;
pub use validate::{validate, Diagnostic};
pub use vec::SparseVec;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

/// Resource caps for the bounded simulators.
///
/// The oracles report `exact = false` whenever a cap actually truncated the
/// search, so a result with `exact = true` is a proof about the bounded-length
/// slice of the language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimCaps {
    /// Upper bound on explored configurations per membership query.
    pub max_configs: usize,
    /// Upper bound on the absolute value of any counter during search.
    pub max_counter: i64,
    /// Upper bound on the stack height during search.
    pub max_stack: usize,
}

impl SimCaps {
    /// Default caps for enumeration up to `max_len`.
    pub fn for_len(max_len: usize) -> Self {
        SimCaps {
            max_configs: 2_000_000,
            max_counter: (10 * max_len as i64) + 50,
            max_stack: 10 * max_len + 50,
        }
    }
}

/// Three-valued answer of a capped membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    /// The search hit a cap before exhausting the frontier.
    Unknown,
}

/// Result of a bounded-length language enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumResult {
    /// Words of length at most `max_len` proven to be in the language.
    pub words: BTreeSet<String>,
    /// The length bound that was used.
    pub max_len: usize,
    /// True iff no cap truncated any membership query, i.e. `words` is
    /// exactly the bounded-length slice of the language.
    pub exact: bool,
}

/// Decides membership of `word`, exploring at most the configured caps.
pub fn accepts(model: &Model, word: &str, caps: &SimCaps) -> Tri {
    match model {
        Model::Rbca(m) => sim::accepts_counter(&sim::CmView::from_rbca(m), word, caps),
        Model::Prbca(m) => sim::accepts_counter(&sim::CmView::from_prbca(m), word, caps),
        Model::ZVass(m) => sim::accepts_zvass(&sim::ZvView::from_zvass(m), word, caps),
        Model::ZPvass(m) => sim::accepts_zvass(&sim::ZvView::from_zpvass(m), word, caps),
        Model::ZVassG(m) => sim::accepts_zvassg(m, word, caps),
        Model::ZGrammar(g) => gramsim::accepts(g, word, caps),
    }
}

/// Enumerates the language slice up to `max_len`.
///
/// Machine kinds are enumerated word by word over the model alphabet, with a
/// counter-oblivious reachability prefilter that discards words that do not
/// even have a state-level run. Grammars are enumerated by a bounded
/// derivation closure.
pub fn enumerate_language(model: &Model, max_len: usize, caps: &SimCaps) -> EnumResult {
    match model {
        Model::ZGrammar(g) => gramsim::enumerate(g, max_len, caps),
        _ => sim::enumerate_machine(model, max_len, caps),
    }
}

/// Parikh image of a word with respect to an ordered alphabet.
pub fn parikh_word(alphabet: &BTreeSet<char>, word: &str) -> BTreeMap<char, usize> {
    let mut image: BTreeMap<char, usize> = alphabet.iter().map(|&c| (c, 0)).collect();
    for c in word.chars() {
        *image.entry(c).or_insert(0) += 1;
    }
    image
}

/// All words over `alphabet` of length at most `max_len`, shortlex order.
pub fn words_up_to(alphabet: &BTreeSet<char>, max_len: usize) -> Vec<String> {
    let letters: Vec<char> = alphabet.iter().copied().collect();
    let mut out = Vec::new();
    let mut layer: Vec<String> = alloc::vec![String::new()];
    out.push(String::new());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &c in &letters {
                let mut w2 = w.clone();
                w2.push(c);
                out.push(w2.clone());
                next.push(w2);
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    out
}

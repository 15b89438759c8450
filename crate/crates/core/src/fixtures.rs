//! The shared corpus: small named machines and grammars with known
//! languages, plus seeded random generators for differential testing.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::{
    CounterOp, Prbca, Production, Rbca, RbcaTransition, SparseVec, Sym, ZGrammar,
};

fn t(from: &str, input: &str, op: CounterOp, to: &str) -> RbcaTransition {
    RbcaTransition {
        from: from.to_string(),
        input: input.to_string(),
        op,
        to: to.to_string(),
    }
}

fn states(transitions: &[RbcaTransition], extra: &[&str]) -> BTreeSet<String> {
    let mut s: BTreeSet<String> = extra.iter().map(|x| x.to_string()).collect();
    for tr in transitions {
        s.insert(tr.from.clone());
        s.insert(tr.to.clone());
    }
    s
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|x| x.to_string()).collect()
}

/// {aⁿbⁿ : n ≥ 0}; one counter, one reversal.
pub fn fx_anbn() -> Rbca {
    let transitions = alloc::vec![
        t("q0", "a", CounterOp::Inc(0), "q0"),
        t("q0", "b", CounterOp::Dec(0), "q1"),
        t("q1", "b", CounterOp::Dec(0), "q1"),
    ];
    Rbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b'].into_iter().collect(),
        counters: 1,
        reversal_bound: 1,
        initial: "q0".to_string(),
        finals: set(&["q0", "q1"]),
        transitions,
    }
}

/// {w ∈ {a,b}* : |w|_a = |w|_b}; two counters, one reversal each.
pub fn fx_eqab() -> Rbca {
    let transitions = alloc::vec![
        t("q0", "a", CounterOp::Inc(0), "q0"),
        t("q0", "b", CounterOp::Inc(1), "q0"),
        t("q0", "", CounterOp::Nop, "f0"),
        t("f0", "", CounterOp::Dec(0), "f1"),
        t("f1", "", CounterOp::Dec(1), "f0"),
    ];
    Rbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b'].into_iter().collect(),
        counters: 2,
        reversal_bound: 1,
        initial: "q0".to_string(),
        finals: set(&["f0"]),
        transitions,
    }
}

/// {aⁱbʲaᵏbˡ : j ≤ i, i − j + k = l, stops allowed early}; one counter that
/// reverses up to three times.
pub fn fx_anbn3() -> Rbca {
    let transitions = alloc::vec![
        t("q0", "a", CounterOp::Inc(0), "q0"),
        t("q0", "b", CounterOp::Dec(0), "q1"),
        t("q1", "b", CounterOp::Dec(0), "q1"),
        t("q1", "a", CounterOp::Inc(0), "q2"),
        t("q2", "a", CounterOp::Inc(0), "q2"),
        t("q2", "b", CounterOp::Dec(0), "q3"),
        t("q3", "b", CounterOp::Dec(0), "q3"),
    ];
    Rbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b'].into_iter().collect(),
        counters: 1,
        reversal_bound: 3,
        initial: "q0".to_string(),
        finals: set(&["q0", "q1", "q3"]),
        transitions,
    }
}

/// {aⁿbⁿcⁿ : n ≥ 0}; the stack matches a against b, one counter matches a
/// against c.
pub fn fx_anbncn() -> Prbca {
    let transitions = alloc::vec![
        t("q0", "a", CounterOp::Push("g".to_string()), "q0a"),
        t("q0a", "", CounterOp::Inc(0), "q0"),
        t("q0", "b", CounterOp::Pop("g".to_string()), "q1"),
        t("q1", "b", CounterOp::Pop("g".to_string()), "q1"),
        t("q1", "c", CounterOp::Dec(0), "q2"),
        t("q2", "c", CounterOp::Dec(0), "q2"),
    ];
    Prbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b', 'c'].into_iter().collect(),
        counters: 1,
        reversal_bound: 1,
        initial: "q0".to_string(),
        finals: set(&["q0", "q2"]),
        transitions,
        stack_alphabet: set(&["g"]),
    }
}

/// The finite language {a, ab}.
pub fn fx_fin() -> Rbca {
    let transitions = alloc::vec![
        t("s0", "a", CounterOp::Nop, "s1"),
        t("s1", "b", CounterOp::Nop, "s2"),
    ];
    Rbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b'].into_iter().collect(),
        counters: 0,
        reversal_bound: 0,
        initial: "s0".to_string(),
        finals: set(&["s1", "s2"]),
        transitions,
    }
}

/// (Σ*#)* over Σ = {a, b, #}: the empty word plus every word ending in #.
/// Every word is a factor of some member.
pub fn fx_blocks() -> Rbca {
    let mut transitions = Vec::new();
    for st in ["s", "p", "f"] {
        transitions.push(t(st, "#", CounterOp::Nop, "f"));
        transitions.push(t(st, "a", CounterOp::Nop, "p"));
        transitions.push(t(st, "b", CounterOp::Nop, "p"));
    }
    Rbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b', '#'].into_iter().collect(),
        counters: 0,
        reversal_bound: 0,
        initial: "s".to_string(),
        finals: set(&["s", "f"]),
        transitions,
    }
}

/// (Σ*a#)* over Σ = {a, b, #}: blocks must end in a#, so every # is
/// preceded by an a and e.g. "##" is never a factor.
pub fn fx_blocks_a() -> Rbca {
    let mut transitions = Vec::new();
    for st in ["q0", "qa", "qo", "qf"] {
        transitions.push(t(st, "a", CounterOp::Nop, "qa"));
        transitions.push(t(st, "b", CounterOp::Nop, "qo"));
        if st == "qa" {
            transitions.push(t(st, "#", CounterOp::Nop, "qf"));
        }
    }
    Rbca {
        states: states(&transitions, &[]),
        alphabet: ['a', 'b', '#'].into_iter().collect(),
        counters: 0,
        reversal_bound: 0,
        initial: "q0".to_string(),
        finals: set(&["q0", "qf"]),
        transitions,
    }
}

/// One-dimensional grammar with productions p1 = (S → aSb, +1),
/// p2 = (S → ε, 0), p3 = (S → cSd, −1). Generates the words where the
/// a/b nesting count equals the c/d nesting count.
pub fn g0() -> ZGrammar {
    let s = "S".to_string();
    ZGrammar {
        nonterminals: set(&["S"]),
        terminals: ['a', 'b', 'c', 'd'].into_iter().collect(),
        start: s.clone(),
        dimension: 1,
        productions: alloc::vec![
            Production {
                id: "p1".to_string(),
                lhs: s.clone(),
                rhs: alloc::vec![Sym::T('a'), Sym::Nt(s.clone()), Sym::T('b')],
                effect: SparseVec::unit(0, 1),
            },
            Production {
                id: "p2".to_string(),
                lhs: s.clone(),
                rhs: Vec::new(),
                effect: SparseVec::new(),
            },
            Production {
                id: "p3".to_string(),
                lhs: s.clone(),
                rhs: alloc::vec![Sym::T('c'), Sym::Nt(s.clone()), Sym::T('d')],
                effect: SparseVec::unit(0, -1),
            },
        ],
    }
}

/// Seeded random machine with single-letter inputs only, so every run
/// consumes input and bounded enumeration terminates naturally.
pub fn random_rbca(seed: u64) -> Rbca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=4usize);
    let counters = rng.gen_range(1..=2usize);
    let reversal_bound = rng.gen_range(1..=3u32);
    let state_names: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    let alphabet = ['a', 'b'];
    let n_trans = rng.gen_range(2..=8usize);
    let mut transitions = Vec::new();
    for _ in 0..n_trans {
        let from = &state_names[rng.gen_range(0..n_states)];
        let to = &state_names[rng.gen_range(0..n_states)];
        let input = alphabet[rng.gen_range(0..2)].to_string();
        let c = rng.gen_range(0..counters);
        let op = match rng.gen_range(0..6u32) {
            0 | 1 => CounterOp::Inc(c),
            2 | 3 => CounterOp::Dec(c),
            4 => {
                if rng.gen_bool(0.5) {
                    CounterOp::Zero(c)
                } else {
                    CounterOp::Nz(c)
                }
            }
            _ => CounterOp::Nop,
        };
        transitions.push(t(from, &input, op, to));
    }
    let mut finals = BTreeSet::new();
    for s in &state_names {
        if rng.gen_bool(0.5) {
            finals.insert(s.clone());
        }
    }
    if finals.is_empty() {
        finals.insert(state_names[rng.gen_range(0..n_states)].clone());
    }
    Rbca {
        states: state_names.iter().cloned().collect(),
        alphabet: alphabet.into_iter().collect(),
        counters,
        reversal_bound,
        initial: state_names[0].clone(),
        finals,
        transitions,
    }
}

/// Seeded random machine of the pushdown kind that never touches its
/// (empty) stack; counter structure kept small with a single reversal.
pub fn random_stackfree_prbca(seed: u64) -> Prbca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5740_c9e1));
    let n_states = rng.gen_range(1..=3usize);
    let counters = rng.gen_range(1..=2usize);
    let state_names: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    let alphabet = ['a', 'b'];
    let n_trans = rng.gen_range(2..=6usize);
    let mut transitions = Vec::new();
    for _ in 0..n_trans {
        let from = &state_names[rng.gen_range(0..n_states)];
        let to = &state_names[rng.gen_range(0..n_states)];
        let input = alphabet[rng.gen_range(0..2)].to_string();
        let c = rng.gen_range(0..counters);
        let op = match rng.gen_range(0..6u32) {
            0 | 1 => CounterOp::Inc(c),
            2 | 3 => CounterOp::Dec(c),
            4 => {
                if rng.gen_bool(0.5) {
                    CounterOp::Zero(c)
                } else {
                    CounterOp::Nz(c)
                }
            }
            _ => CounterOp::Nop,
        };
        transitions.push(t(from, &input, op, to));
    }
    let mut finals = BTreeSet::new();
    for s in &state_names {
        if rng.gen_bool(0.5) {
            finals.insert(s.clone());
        }
    }
    if finals.is_empty() {
        finals.insert(state_names[0].clone());
    }
    Prbca {
        states: state_names.iter().cloned().collect(),
        alphabet: alphabet.into_iter().collect(),
        counters,
        reversal_bound: 1,
        initial: state_names[0].clone(),
        finals,
        transitions,
        stack_alphabet: BTreeSet::new(),
    }
}

/// Seeded random grammar: at most 3 nonterminals, 6 productions, effect
/// entries in [−3, 3], dimension at most 2.
pub fn random_zgrammar(seed: u64) -> ZGrammar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9));
    let n_nts = rng.gen_range(1..=3usize);
    let dimension = rng.gen_range(0..=2usize);
    let nts: Vec<String> = (0..n_nts)
        .map(|i| ["S", "A", "B"][i].to_string())
        .collect();
    let terminals = ['a', 'b'];
    let n_prods = rng.gen_range(1..=6usize);
    let mut productions = Vec::new();
    for i in 0..n_prods {
        let lhs = nts[rng.gen_range(0..n_nts)].clone();
        let len = rng.gen_range(0..=3usize);
        let rhs: Vec<Sym> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.4) {
                    Sym::Nt(nts[rng.gen_range(0..n_nts)].clone())
                } else {
                    Sym::T(terminals[rng.gen_range(0..2)])
                }
            })
            .collect();
        let effect = SparseVec::from_entries(
            (0..dimension)
                .map(|d| (d as u32, rng.gen_range(-3..=3i64)))
                .collect(),
        );
        productions.push(Production {
            id: format!("p{i}"),
            lhs,
            rhs,
            effect,
        });
    }
    ZGrammar {
        nonterminals: nts.iter().cloned().collect(),
        terminals: terminals.into_iter().collect(),
        start: "S".to_string(),
        dimension,
        productions,
    }
}

/// Seeded random finite language: at most `max_words` words of length at
/// most `max_len` over {a, b}.
pub fn random_finite_language(seed: u64, max_words: usize, max_len: usize) -> BTreeSet<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x1f3d_5b79));
    let n = rng.gen_range(0..=max_words);
    let mut words = BTreeSet::new();
    for _ in 0..n {
        let len = rng.gen_range(0..=max_len);
        let w: String = (0..len)
            .map(|_| if rng.gen_bool(0.5) { 'a' } else { 'b' })
            .collect();
        words.insert(w);
    }
    words
}

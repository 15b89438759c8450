use std::collections::BTreeSet;

use rbca_core::fixtures::*;
use rbca_core::models::{
    CounterOp, Model, Production, Rbca, RbcaTransition, SimCaps, SparseVec, Sym, ZGrammar,
    ZTransition, ZVass, enumerate_language,
};
use rbca_core::normalize::*;

fn words(model: &Model, max_len: usize) -> BTreeSet<String> {
    let caps = SimCaps::for_len(max_len);
    let r = enumerate_language(model, max_len, &caps);
    assert!(r.exact, "enumeration hit a cap");
    r.words
}

fn nfa(
    nts: &[&str],
    start: &str,
    rules: &[(&str, &str, Option<&str>)],
    terminals: &[char],
) -> ZGrammar {
    ZGrammar {
        nonterminals: nts.iter().map(|s| s.to_string()).collect(),
        terminals: terminals.iter().copied().collect(),
        start: start.to_string(),
        dimension: 0,
        productions: rules
            .iter()
            .enumerate()
            .map(|(i, (lhs, word, nt))| Production {
                id: format!("r{i}"),
                lhs: lhs.to_string(),
                rhs: word
                    .chars()
                    .map(Sym::T)
                    .chain(nt.iter().map(|n| Sym::Nt(n.to_string())))
                    .collect(),
                effect: SparseVec::new(),
            })
            .collect(),
    }
}

#[test]
fn reduce_counter_counts() {
    for k in 1..=2usize {
        for r in 1..=3u32 {
            let mut m = fx_anbn();
            m.counters = k;
            m.reversal_bound = r;
            let out = reduce_reversals_to_one(&m);
            let r_odd = if r % 2 == 1 { r } else { r + 1 };
            let m_seg = ((r_odd + 1) / 2) as usize;
            assert_eq!(out.counters, k * m_seg + k * (r_odd as usize + 1));
            assert!(out.counters <= 2 * k * (r as usize + 1), "k={k} r={r}");
            assert_eq!(out.reversal_bound, 1);
        }
    }
}

#[test]
fn reduce_preserves_fixture_languages() {
    for (m, len) in [(fx_anbn(), 8), (fx_eqab(), 8), (fx_anbn3(), 8)] {
        let out = reduce_reversals_to_one(&m);
        assert_eq!(
            words(&Model::Rbca(m), len),
            words(&Model::Rbca(out), len),
        );
    }
}

#[test]
fn reduce_preserves_prbca_language() {
    let m = fx_anbncn();
    let out = reduce_reversals_to_one_prbca(&m);
    assert_eq!(out.reversal_bound, 1);
    assert_eq!(
        words(&Model::Prbca(m), 6),
        words(&Model::Prbca(out), 6),
    );
}

#[test]
fn reduce_preserves_random_languages() {
    for seed in 0..25u64 {
        let m = random_rbca(seed);
        let out = reduce_reversals_to_one(&m);
        assert_eq!(
            words(&Model::Rbca(m), 8),
            words(&Model::Rbca(out), 8),
            "seed {seed}"
        );
    }
}

fn loop_zvass(effects: &[(char, i64)]) -> ZVass {
    // Single state, one self-loop per letter with the given 1-dim effect.
    ZVass {
        states: ["q"].iter().map(|s| s.to_string()).collect(),
        alphabet: effects.iter().map(|&(c, _)| c).collect(),
        dimension: 1,
        initial: "q".to_string(),
        finals: ["q"].iter().map(|s| s.to_string()).collect(),
        transitions: effects
            .iter()
            .map(|&(c, v)| ZTransition {
                from: "q".to_string(),
                input: c.to_string(),
                effect: SparseVec::unit(0, v),
                to: "q".to_string(),
            })
            .collect(),
    }
}

#[test]
fn binarize_zvass_language_sets_agree() {
    let m = loop_zvass(&[('a', 5), ('b', -5)]);
    let out = binarize_zvass(&m);
    assert_eq!(out.dimension, 3);
    for t in out.transitions.iter().take(2) {
        assert!(t.effect.iter().all(|(_, v)| (-2..=2).contains(&v)));
    }
    let caps = SimCaps::for_len(6);
    let a = enumerate_language(&Model::ZVass(m), 6, &caps);
    let b = enumerate_language(&Model::ZVass(out), 6, &caps);
    assert!(a.exact);
    assert_eq!(a.words, b.words);
}

#[test]
fn binarize_zvass_unary_is_identity_shape() {
    let m = loop_zvass(&[('a', 1), ('b', -1)]);
    let out = binarize_zvass(&m);
    assert_eq!(out.dimension, 1);
    assert_eq!(out.transitions.len(), m.transitions.len());
}

#[test]
fn binarize_zgrammar_language_sets_agree() {
    let mut g = g0();
    for p in g.productions.iter_mut() {
        p.effect = p.effect.scaled(6);
    }
    let out = binarize_zgrammar(&g);
    assert_eq!(out.dimension, 3);
    let caps = SimCaps::for_len(6);
    let a = enumerate_language(&Model::ZGrammar(g), 6, &caps);
    let b = enumerate_language(&Model::ZGrammar(out), 6, &caps);
    assert!(a.exact);
    assert_eq!(a.words, b.words);
}

#[test]
fn intersect_rbca_products() {
    // Σ*bΣ* forces at least one b.
    let contains_b = nfa(
        &["P", "Q"],
        "P",
        &[
            ("P", "a", Some("P")),
            ("P", "b", Some("P")),
            ("P", "b", Some("Q")),
            ("Q", "a", Some("Q")),
            ("Q", "b", Some("Q")),
            ("Q", "", None),
        ],
        &['a', 'b'],
    );
    let out = intersect_rbca(&fx_anbn(), &contains_b).unwrap();
    let mut expect = words(&Model::Rbca(fx_anbn()), 8);
    expect.remove("");
    assert_eq!(words(&Model::Rbca(out), 8), expect);

    let astar_bstar = nfa(
        &["A", "B"],
        "A",
        &[
            ("A", "a", Some("A")),
            ("A", "", Some("B")),
            ("B", "b", Some("B")),
            ("B", "", None),
        ],
        &['a', 'b'],
    );
    let out = intersect_rbca(&fx_eqab(), &astar_bstar).unwrap();
    assert_eq!(
        words(&Model::Rbca(out), 8),
        words(&Model::Rbca(fx_anbn()), 8),
    );
}

#[test]
fn intersect_identity() {
    let sigma_star = nfa(
        &["U"],
        "U",
        &[
            ("U", "a", Some("U")),
            ("U", "b", Some("U")),
            ("U", "", None),
        ],
        &['a', 'b'],
    );
    let out = intersect_rbca(&fx_anbn(), &sigma_star).unwrap();
    assert_eq!(
        words(&Model::Rbca(out), 8),
        words(&Model::Rbca(fx_anbn()), 8),
    );
}

#[test]
fn intersect_zgrammar_bar_hillel() {
    let ab_only = nfa(
        &["U"],
        "U",
        &[
            ("U", "a", Some("U")),
            ("U", "b", Some("U")),
            ("U", "", None),
        ],
        &['a', 'b', 'c', 'd'],
    );
    let out = intersect_zgrammar(&g0(), &ab_only).unwrap();
    // Within {a,b}* the effects of G₀ never cancel except on the empty word.
    assert_eq!(
        words(&Model::ZGrammar(out), 6),
        ["".to_string()].into_iter().collect::<BTreeSet<_>>(),
    );

    let all = nfa(
        &["U"],
        "U",
        &[
            ("U", "a", Some("U")),
            ("U", "b", Some("U")),
            ("U", "c", Some("U")),
            ("U", "d", Some("U")),
            ("U", "", None),
        ],
        &['a', 'b', 'c', 'd'],
    );
    let out = intersect_zgrammar(&g0(), &all).unwrap();
    assert_eq!(
        words(&Model::ZGrammar(out), 6),
        words(&Model::ZGrammar(g0()), 6),
    );
}

#[test]
fn cnf_shapes_and_language() {
    let res = cnf_zgrammar(&g0()).unwrap();
    assert!(res.epsilon_in_language);
    for p in &res.grammar.productions {
        match &p.rhs[..] {
            [Sym::T(_)] => {}
            [Sym::Nt(_), Sym::Nt(_)] => {}
            other => panic!("non-CNF rhs {other:?} in {}", p.id),
        }
    }
    let mut expect = words(&Model::ZGrammar(g0()), 6);
    expect.remove("");
    assert_eq!(words(&Model::ZGrammar(res.grammar), 6), expect);
}

#[test]
fn cnf_unit_chain_collapses() {
    let g = ZGrammar {
        nonterminals: ["S", "B"].iter().map(|s| s.to_string()).collect(),
        terminals: ['a'].into_iter().collect(),
        start: "S".to_string(),
        dimension: 1,
        productions: vec![
            Production {
                id: "u".to_string(),
                lhs: "S".to_string(),
                rhs: vec![Sym::Nt("B".to_string())],
                effect: SparseVec::unit(0, 2),
            },
            Production {
                id: "t".to_string(),
                lhs: "B".to_string(),
                rhs: vec![Sym::T('a')],
                effect: SparseVec::unit(0, -2),
            },
        ],
    };
    let res = cnf_zgrammar(&g).unwrap();
    assert!(!res.epsilon_in_language);
    assert_eq!(res.grammar.productions.len(), 1);
    let p = &res.grammar.productions[0];
    assert_eq!(p.rhs, vec![Sym::T('a')]);
    assert!(p.effect.is_zero());
}

#[test]
fn cnf_random_roundtrip() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let g = random_zgrammar(seed);
        let Ok(res) = cnf_zgrammar(&g) else { continue };
        checked += 1;
        let caps = SimCaps::for_len(6);
        let a = enumerate_language(&Model::ZGrammar(g), 6, &caps);
        if !a.exact {
            continue;
        }
        let mut expect = a.words.clone();
        let had_eps = expect.remove("");
        assert_eq!(had_eps, res.epsilon_in_language, "seed {seed}");
        assert_eq!(
            words(&Model::ZGrammar(res.grammar), 6),
            expect,
            "seed {seed}"
        );
        if checked >= 25 {
            break;
        }
    }
    assert!(checked >= 10);
}

#[test]
fn reduce_transition_structure_has_dead_state() {
    let out = reduce_reversals_to_one(&fx_anbn());
    let diags = rbca_core::models::validate(&Model::Rbca(out));
    assert!(diags.iter().any(|d| !d.is_error && d.location.contains("dead")));
    assert!(diags.iter().all(|d| !d.is_error));
}

fn tiny(trans: &[(&str, &str, CounterOp, &str)], finals: &[&str], k: usize, r: u32) -> Rbca {
    let transitions: Vec<RbcaTransition> = trans
        .iter()
        .map(|(f, w, op, t)| RbcaTransition {
            from: f.to_string(),
            input: w.to_string(),
            op: op.clone(),
            to: t.to_string(),
        })
        .collect();
    let mut states: BTreeSet<String> = finals.iter().map(|s| s.to_string()).collect();
    for t in &transitions {
        states.insert(t.from.clone());
        states.insert(t.to.clone());
    }
    Rbca {
        states,
        alphabet: ['a', 'b'].into_iter().collect(),
        counters: k,
        reversal_bound: r,
        initial: "q0".to_string(),
        finals: finals.iter().map(|s| s.to_string()).collect(),
        transitions,
    }
}

#[test]
fn reduce_handles_tests_mid_run() {
    // Zero and nonzero tests against a counter that reverses twice.
    let m = tiny(
        &[
            ("q0", "a", CounterOp::Inc(0), "q0"),
            ("q0", "b", CounterOp::Dec(0), "q1"),
            ("q1", "b", CounterOp::Dec(0), "q1"),
            ("q1", "", CounterOp::Zero(0), "q2"),
            ("q2", "a", CounterOp::Inc(0), "q2"),
            ("q2", "", CounterOp::Nz(0), "q3"),
            ("q3", "b", CounterOp::Dec(0), "q3"),
        ],
        &["q0", "q3"],
        1,
        3,
    );
    let out = reduce_reversals_to_one(&m);
    assert_eq!(
        words(&Model::Rbca(m), 8),
        words(&Model::Rbca(out), 8),
    );
}

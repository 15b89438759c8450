use rbca_core::convert::{
    prbca_to_zgrammar, rbca1_to_zvassg, rbca_to_zvass, trim_zvass, zvass_to_rbca, zvassg_to_zvass,
    ConvertError, ConvertOptions,
};
use rbca_core::fixtures::{
    fx_anbn, fx_anbn3, fx_anbncn, fx_eqab, fx_fin, random_rbca, random_stackfree_prbca,
};
use rbca_core::models::{
    enumerate_language, CounterOp, Model, Rbca, RbcaTransition, SimCaps, SparseVec, ZTransition,
    ZVass,
};
use std::collections::BTreeSet;

fn slice(model: &Model, max_len: usize) -> BTreeSet<String> {
    let r = enumerate_language(model, max_len, &SimCaps::for_len(max_len));
    assert!(r.exact, "enumeration hit a cap for {}", model.kind_name());
    r.words
}

fn assert_same_language(a: &Model, b: &Model, max_len: usize) {
    let wa = slice(a, max_len);
    let wb = slice(b, max_len);
    assert_eq!(
        wa,
        wb,
        "language mismatch between {} and {}",
        a.kind_name(),
        b.kind_name()
    );
}

#[test]
fn claim_encoding_requires_one_reversal() {
    let err = rbca1_to_zvassg(&fx_anbn3(), &ConvertOptions::default());
    assert_eq!(err.unwrap_err(), ConvertError::NotOneReversal(3));
}

#[test]
fn claim_encoding_variable_and_dimension_counts() {
    let g = rbca1_to_zvassg(&fx_eqab(), &ConvertOptions::default()).unwrap();
    assert_eq!(g.variables.len(), 16 * 2 * 2);
    assert_eq!(g.dimension, 8);
    let lit = rbca1_to_zvassg(&fx_eqab(), &ConvertOptions { paper_literal: true }).unwrap();
    assert_eq!(lit.variables.len(), 64);
    assert_eq!(lit.dimension, 2);
}

#[test]
fn guarded_stage_preserves_one_reversal_fixtures() {
    let mut fin = fx_fin();
    fin.reversal_bound = 1;
    for m in [fx_anbn(), fx_eqab(), fin] {
        let g = rbca1_to_zvassg(&m, &ConvertOptions::default()).unwrap();
        assert_same_language(&Model::Rbca(m), &Model::ZVassG(g), 6);
    }
}

#[test]
fn guard_compilation_preserves_guarded_language() {
    for m in [fx_anbn(), fx_eqab()] {
        let g = rbca1_to_zvassg(&m, &ConvertOptions::default()).unwrap();
        let v = trim_zvass(&zvassg_to_zvass(&g));
        assert_same_language(&Model::ZVassG(g), &Model::ZVass(v), 6);
    }
}

#[test]
fn pipeline_preserves_fixture_languages() {
    for m in [fx_anbn(), fx_eqab(), fx_anbn3()] {
        let v = rbca_to_zvass(&m, &ConvertOptions::default());
        assert_same_language(&Model::Rbca(m), &Model::ZVass(v), 7);
    }
}

#[test]
fn pipeline_preserves_random_languages() {
    for seed in 0..20 {
        let m = random_rbca(seed);
        let v = rbca_to_zvass(&m, &ConvertOptions::default());
        assert_same_language(&Model::Rbca(m), &Model::ZVass(v), 7);
    }
}

#[test]
fn paper_literal_admits_false_nonzero_accepts() {
    // A single nonzero test on a counter that is never incremented: the
    // language is empty, but without the auxiliary-counter refinement the
    // test can claim phase 2 of a segment whose entry never happens.
    let mut states = BTreeSet::new();
    states.insert("q0".to_string());
    states.insert("f".to_string());
    let m = Rbca {
        states,
        alphabet: ['a'].into_iter().collect(),
        counters: 1,
        reversal_bound: 1,
        initial: "q0".to_string(),
        finals: ["f".to_string()].into_iter().collect(),
        transitions: vec![RbcaTransition {
            from: "q0".to_string(),
            input: "a".to_string(),
            op: CounterOp::Nz(0),
            to: "f".to_string(),
        }],
    };
    assert!(slice(&Model::Rbca(m.clone()), 3).is_empty());
    let refined = rbca1_to_zvassg(&m, &ConvertOptions::default()).unwrap();
    assert!(slice(&Model::ZVassG(refined), 3).is_empty());
    let literal = rbca1_to_zvassg(&m, &ConvertOptions { paper_literal: true }).unwrap();
    assert!(slice(&Model::ZVassG(literal), 3).contains("a"));
}

#[test]
fn reverse_direction_preserves_language() {
    let mut states = BTreeSet::new();
    for q in ["s", "t"] {
        states.insert(q.to_string());
    }
    // a adds (2, 1), b adds (-1, -1); accepted iff both sums are zero.
    let v = ZVass {
        states,
        alphabet: ['a', 'b'].into_iter().collect(),
        dimension: 2,
        initial: "s".to_string(),
        finals: ["s".to_string()].into_iter().collect(),
        transitions: vec![
            ZTransition {
                from: "s".to_string(),
                input: "a".to_string(),
                effect: SparseVec::from_entries(vec![(0, 2), (1, 1)]),
                to: "s".to_string(),
            },
            ZTransition {
                from: "s".to_string(),
                input: "b".to_string(),
                effect: SparseVec::from_entries(vec![(0, -1), (1, -1)]),
                to: "s".to_string(),
            },
        ],
    };
    let back = zvass_to_rbca(&v);
    assert_eq!(back.reversal_bound, 1);
    assert_eq!(back.counters, 4);
    assert_same_language(&Model::ZVass(v), &Model::Rbca(back), 6);
}

#[test]
fn round_trip_through_integer_counters() {
    let m = fx_anbn3();
    let v = rbca_to_zvass(&m, &ConvertOptions::default());
    let back = zvass_to_rbca(&v);
    assert_eq!(back.reversal_bound, 1);
    assert_same_language(&Model::Rbca(m), &Model::Rbca(back), 6);
}

#[test]
fn pushdown_pipeline_matches_oracle() {
    let g = prbca_to_zgrammar(&fx_anbncn());
    let words = slice(&Model::ZGrammar(g), 6);
    let expected: BTreeSet<String> = ["", "abc", "aabbcc"]
        .into_iter()
        .map(str::to_string)
        .collect();
    assert_eq!(words, expected);
}

#[test]
fn pushdown_pipeline_preserves_random_stackfree_languages() {
    for seed in 0..10 {
        let m = random_stackfree_prbca(seed);
        let g = prbca_to_zgrammar(&m);
        assert_same_language(&Model::Prbca(m), &Model::ZGrammar(g), 6);
    }
}

#[test]
fn stackfree_pushdown_grammar_is_left_linear() {
    for seed in 0..5 {
        let g = prbca_to_zgrammar(&random_stackfree_prbca(seed));
        assert!(g.is_left_linear());
    }
}

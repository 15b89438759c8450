use std::collections::BTreeSet;

use rbca_core::fixtures::{fx_anbn, fx_anbncn, fx_blocks, fx_eqab, fx_fin, g0};
use rbca_core::growth::{
    check_linembed, classify_growth, clears_exponential_threshold, count_words, GrowthClass,
};
use rbca_core::linear::decompose_flow;
use rbca_core::models::{enumerate_language, Model, SimCaps, ZGrammar};
use rbca_core::normalize::cnf_zgrammar;
use rbca_core::unbounded::{cancelable_productions, embed_factor_witness, DecisionCaps};

fn corpus() -> Vec<(&'static str, Model)> {
    vec![
        ("anbn", Model::Rbca(fx_anbn())),
        ("eqab", Model::Rbca(fx_eqab())),
        ("anbncn", Model::Prbca(fx_anbncn())),
        ("fin", Model::Rbca(fx_fin())),
        ("blocks", Model::Rbca(fx_blocks())),
    ]
}

#[test]
fn cumulative_counts_on_fixtures() {
    let anbn = count_words(&Model::Rbca(fx_anbn()), 6);
    let expected: Vec<Option<u64>> = [1, 1, 2, 2, 3, 3, 4].map(Some).into();
    assert_eq!(anbn, expected);

    let eqab = count_words(&Model::Rbca(fx_eqab()), 4);
    assert_eq!(eqab.last(), Some(&Some(9)));

    let empty = ZGrammar {
        nonterminals: ["S".to_string()].into(),
        terminals: BTreeSet::new(),
        start: "S".to_string(),
        dimension: 0,
        productions: Vec::new(),
    };
    let counts = count_words(&Model::ZGrammar(empty), 5);
    assert_eq!(counts, vec![Some(0); 6]);
}

#[test]
fn counts_are_monotone_on_corpus() {
    for (name, model) in corpus() {
        let counts = count_words(&model, 8);
        for w in counts.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                assert!(a <= b, "{name}: counts decreased");
            }
        }
    }
}

#[test]
fn classification_on_fixtures() {
    let caps = DecisionCaps::default();

    let anbn = classify_growth(&Model::Rbca(fx_anbn()), &caps).unwrap();
    assert_eq!(anbn.class, GrowthClass::Polynomial);
    assert_eq!(anbn.counts[6], Some(4));

    let anbncn = classify_growth(&Model::Prbca(fx_anbncn()), &caps).unwrap();
    assert_eq!(anbncn.class, GrowthClass::Polynomial);

    let eqab = classify_growth(&Model::Rbca(fx_eqab()), &caps).unwrap();
    assert_eq!(eqab.class, GrowthClass::Exponential);
    assert_eq!(eqab.counts[4], Some(9));
    let [u1, u2] = &eqab.witness[..] else {
        panic!("exponential report carries a word pair");
    };
    assert_ne!(format!("{u1}{u2}"), format!("{u2}{u1}"));
    for m in 8..=12 {
        if let Some(g) = eqab.counts[m] {
            assert!(
                (g as u128) * 10u128.pow(m as u32) >= 13u128.pow(m as u32),
                "eqab growth below 1.3^{m}"
            );
        }
    }
    assert_eq!(eqab.empirical, Some(true));
    assert_eq!(clears_exponential_threshold(&eqab.counts), Some(true));
}

#[test]
fn linembed_examples() {
    let yes = [("ab".to_string(), "xaby".to_string())];
    assert!(check_linembed(&yes, 3));
    let no = [("ab".to_string(), "b".to_string())];
    assert!(!check_linembed(&no, 100));
}

#[test]
fn linembed_holds_on_cnf_witnesses() {
    let cnf = cnf_zgrammar(&g0()).unwrap().grammar;
    let m: BTreeSet<String> = cnf.nonterminals.clone();
    let cancel = cancelable_productions(&cnf, &m, 64);
    assert!(!cancel.capped);
    let mut pairs = Vec::new();
    for flow in cancel.flows.values() {
        for tau in decompose_flow(&cnf, flow).unwrap() {
            let full =
                embed_factor_witness(&cnf, &m, &cancel.flows, &tau, 64).expect("embeddable");
            assert!(full.is_complete(&cnf));
            let host = full.yield_word();
            let (u, v) = tau.yield_sides();
            for side in [u, v] {
                if !side.is_empty() {
                    pairs.push((side, host.clone()));
                }
            }
        }
    }
    assert!(!pairs.is_empty());
    assert!(check_linembed(&pairs, 8));
}

fn in_tuple_star(word: &str, tuple: &[&str]) -> bool {
    let w = word.as_bytes();
    let mut frontier: Vec<(usize, usize)> = vec![(0, 0)];
    let mut seen: BTreeSet<(usize, usize)> = frontier.iter().copied().collect();
    while let Some((pos, comp)) = frontier.pop() {
        if pos == w.len() {
            return true;
        }
        for (j, part) in tuple.iter().enumerate().skip(comp) {
            let p = part.as_bytes();
            if w[pos..].starts_with(p) && seen.insert((pos + p.len(), j)) {
                frontier.push((pos + p.len(), j));
            }
        }
    }
    false
}

fn bounded_superset_exists(words: &BTreeSet<String>, letters: &[char]) -> bool {
    let mut candidates: Vec<String> = vec![String::new()];
    for _ in 0..3 {
        let longer: Vec<String> = candidates
            .iter()
            .flat_map(|w| letters.iter().map(move |c| format!("{w}{c}")))
            .collect();
        candidates.extend(longer);
    }
    candidates.retain(|w| !w.is_empty());
    let covers = |tuple: &[&str]| words.iter().all(|w| in_tuple_star(w, tuple));
    let mut stack: Vec<Vec<&str>> = vec![Vec::new()];
    while let Some(tuple) = stack.pop() {
        if covers(&tuple) {
            return true;
        }
        if tuple.len() == 4 {
            continue;
        }
        for cand in &candidates {
            let mut next = tuple.clone();
            next.push(cand);
            stack.push(next);
        }
    }
    false
}

fn cubic_fit_at(points: &[(f64, f64)], x: f64) -> f64 {
    let mut a = [[0f64; 5]; 4];
    for &(px, py) in points {
        let basis = [1.0, px, px * px, px * px * px];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] += basis[i] * basis[j];
            }
            a[i][4] += basis[i] * py;
        }
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in 0..4 {
            if row != col && a[col][col].abs() > 1e-12 {
                let f = a[row][col] / a[col][col];
                for k in col..5 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..4).map(|i| a[i][4] / a[i][i]).collect();
    coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * x * x * x
}

#[test]
fn dichotomy_verdicts_are_consistent_with_enumeration() {
    let caps = DecisionCaps::default();
    for (name, model) in corpus() {
        let report = classify_growth(&model, &caps).unwrap();
        match report.class {
            GrowthClass::Polynomial => {
                let enumed = enumerate_language(&model, 8, &SimCaps::for_len(8));
                assert!(enumed.exact, "{name}: enumeration capped");
                let letters: Vec<char> =
                    enumed.words.iter().flat_map(|w| w.chars()).collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect();
                assert!(
                    bounded_superset_exists(&enumed.words, &letters),
                    "{name}: polynomial but no small bounded superset"
                );
            }
            GrowthClass::Exponential => {
                let pts: Vec<(f64, f64)> = (0..=9)
                    .filter_map(|m| report.counts[m].map(|g| (m as f64, g as f64)))
                    .collect();
                if pts.len() == 10 {
                    if let Some(g10) = report.counts[10] {
                        let fit = cubic_fit_at(&pts, 10.0);
                        assert!(
                            g10 as f64 > fit,
                            "{name}: g(≤10) = {g10} does not beat cubic fit {fit}"
                        );
                    }
                }
            }
            GrowthClass::Unknown => panic!("{name}: expected an exact classification"),
        }
    }
}

#[test]
fn classification_never_flips_across_caps() {
    let tight = DecisionCaps {
        solve_cap: 8,
        ..DecisionCaps::default()
    };
    let caps = DecisionCaps::default();
    for (name, model) in corpus() {
        let low = classify_growth(&model, &tight).unwrap().class;
        let high = classify_growth(&model, &caps).unwrap().class;
        assert!(
            low == high || low == GrowthClass::Unknown || high == GrowthClass::Unknown,
            "{name}: classification flipped between caps ({low:?} vs {high:?})"
        );
    }
}

use std::collections::BTreeSet;

use rbca_core::convert::to_zgrammar_model;
use rbca_core::fixtures::{
    fx_anbn, fx_anbncn, fx_blocks, fx_blocks_a, fx_eqab, fx_fin, g0, random_finite_language,
    random_zgrammar,
};
use rbca_core::linear::{counter_effect, is_flow, ProdVector};
use rbca_core::models::{
    enumerate_language, DerivationTree, Model, Production, SimCaps, SparseVec, Sym, Tri,
    ZGrammar,
};
use rbca_core::unbounded::{
    cancelable_productions, cfg_bounded, decide_predicate, embed_factor_witness, l_aq,
    nfa_factor_universal, pump_side_grammar, BaseOutcome, DecisionCaps, PredicateSpec, Side,
};

fn words_of(g: &ZGrammar, len: usize) -> BTreeSet<String> {
    enumerate_language(&Model::ZGrammar(g.clone()), len, &SimCaps::for_len(len)).words
}

fn decide(model: &Model, pred: PredicateSpec) -> Tri {
    decide_predicate(model, &pred, &DecisionCaps::default())
        .expect("supported combination")
        .outcome
}

#[test]
fn pump_side_examples_on_g0() {
    let g = g0();
    let q: BTreeSet<String> = ["p1", "p2", "p3"].map(String::from).into();
    let left = pump_side_grammar(&g, "S", &q, Side::Left);
    let right = pump_side_grammar(&g, "S", &q, Side::Right);
    let expect = |letters: [char; 2]| -> BTreeSet<String> {
        let mut out: BTreeSet<String> = [String::new()].into();
        for _ in 0..5 {
            let longer: Vec<String> = out
                .iter()
                .flat_map(|w| letters.iter().map(move |c| format!("{w}{c}")))
                .collect();
            out.extend(longer);
        }
        out.retain(|w| w.len() <= 5);
        out
    };
    assert_eq!(words_of(&left, 5), expect(['a', 'c']));
    assert_eq!(words_of(&right, 5), expect(['b', 'd']));
    let none = pump_side_grammar(&g, "S", &BTreeSet::new(), Side::Left);
    assert_eq!(words_of(&none, 5), [String::new()].into());
}

#[test]
fn pump_sides_of_left_linear_grammars_stay_left_linear() {
    let g = to_zgrammar_model(&Model::Rbca(fx_anbn())).trimmed();
    assert!(g.is_left_linear());
    let all: BTreeSet<String> = g.nonterminals.clone();
    let q = cancelable_productions(&g, &all, 64);
    assert!(!q.capped);
    for a in &all {
        assert!(l_aq(&g, a, &q.cancelable).is_left_linear());
    }
}

#[test]
fn realizability_examples_on_g0() {
    let g = g0();
    let m: BTreeSet<String> = ["S".to_string()].into();
    assert_eq!(rbca_core::unbounded::is_realizable(&g, &m, 8), Tri::Yes);
    assert_eq!(
        rbca_core::unbounded::is_realizable(&g, &BTreeSet::new(), 8),
        Tri::No
    );
}

fn brute_cancelable(g: &ZGrammar, pm: &[String], budget: u64) -> BTreeSet<String> {
    let mut found: BTreeSet<String> = BTreeSet::new();
    let mut counts = vec![0u64; pm.len()];
    loop {
        let total: u64 = counts.iter().sum();
        if total > 0 && total <= budget {
            let v: ProdVector = pm
                .iter()
                .zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(id, &c)| (id.clone(), c))
                .collect();
            if is_flow(g, &v) && counter_effect(g, &v).is_zero() {
                found.extend(v.keys().cloned());
            }
        }
        let mut i = 0;
        loop {
            if i == counts.len() {
                return found;
            }
            counts[i] += 1;
            if counts.iter().sum::<u64>() <= budget {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn cancelability_solver_agrees_with_brute_force_pump_multisets() {
    for seed in 0..40 {
        let g = random_zgrammar(seed);
        let m: BTreeSet<String> = g.nonterminals.clone();
        let pm = rbca_core::linear::productions_over(&g, &m);
        if pm.is_empty() || pm.len() > 7 {
            continue;
        }
        let brute = brute_cancelable(&g, &pm, 6);
        let ilp = cancelable_productions(&g, &m, 64);
        assert!(!ilp.capped, "seed {seed} capped");
        for p in &brute {
            assert!(ilp.cancelable.contains(p), "seed {seed}: brute found {p}");
        }
        for p in &ilp.cancelable {
            let witness_total: u64 = ilp.flows[p].values().sum();
            assert!(
                brute.contains(p) || witness_total > 6,
                "seed {seed}: solver found {p} with small witness missed by brute force"
            );
        }
    }
}

fn chain_pump(g: &ZGrammar, ids: &[&str]) -> DerivationTree {
    let mut tree = DerivationTree::of_production(g, ids[0]).unwrap();
    for id in &ids[1..] {
        let sub = DerivationTree::of_production(g, id).unwrap();
        assert!(tree.graft("S", sub));
    }
    tree
}

#[test]
fn factor_witness_embedding_on_g0() {
    let g = g0();
    let m: BTreeSet<String> = ["S".to_string()].into();
    let cancel = cancelable_productions(&g, &m, 64);
    assert_eq!(
        cancel.cancelable,
        ["p1", "p3"].map(String::from).into_iter().collect()
    );
    let mut pumps: Vec<Vec<&str>> = vec![vec!["p1"]];
    for seed in 0..10u64 {
        let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut ids = Vec::new();
        for _ in 0..1 + seed % 4 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ids.push(if s >> 33 & 1 == 0 { "p1" } else { "p3" });
        }
        pumps.push(ids);
    }
    for ids in pumps {
        let tau = chain_pump(&g, &ids);
        let (u, v) = tau.yield_sides();
        let full =
            embed_factor_witness(&g, &m, &cancel.flows, &tau, 64).expect("embedding succeeds");
        assert!(full.is_complete(&g));
        let word = full.yield_word();
        assert!(word.contains(&u), "{ids:?}: {word} misses left side {u}");
        assert!(word.contains(&v), "{ids:?}: {word} misses right side {v}");
    }
}

#[test]
fn fixture_predicate_verdicts() {
    let nb = PredicateSpec::notbounded;
    let inf = PredicateSpec::infinite;
    let fu = PredicateSpec::factor_universal;
    assert_eq!(decide(&Model::Rbca(fx_anbn()), nb()), Tri::No);
    assert_eq!(decide(&Model::Rbca(fx_eqab()), nb()), Tri::Yes);
    assert_eq!(decide(&Model::Prbca(fx_anbncn()), nb()), Tri::No);
    assert_eq!(decide(&Model::Rbca(fx_anbn()), inf()), Tri::Yes);
    assert_eq!(decide(&Model::Rbca(fx_fin()), inf()), Tri::No);
    assert_eq!(decide(&Model::Rbca(fx_blocks()), fu()), Tri::Yes);
    assert_eq!(decide(&Model::Rbca(fx_blocks_a()), fu()), Tri::No);
}

#[test]
fn factor_universality_rejects_pushdown_inputs() {
    let r = decide_predicate(
        &Model::Prbca(fx_anbncn()),
        &PredicateSpec::factor_universal(),
        &DecisionCaps::default(),
    );
    assert!(r.is_err());
}

fn brute_pump_side_words(
    g: &ZGrammar,
    a: &str,
    max_len: usize,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let start = vec![Sym::Nt(a.to_string())];
    let mut seen: BTreeSet<Vec<Sym>> = [start.clone()].into();
    let mut queue = vec![start];
    let mut lefts = BTreeSet::new();
    let mut rights = BTreeSet::new();
    while let Some(form) = queue.pop() {
        let nts: Vec<usize> = form
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Sym::Nt(_)))
            .map(|(i, _)| i)
            .collect();
        if let [i] = nts[..] {
            if matches!(&form[i], Sym::Nt(n) if n == a) {
                let side = |syms: &[Sym]| -> String {
                    syms.iter()
                        .map(|s| match s {
                            Sym::T(c) => *c,
                            Sym::Nt(_) => unreachable!(),
                        })
                        .collect()
                };
                let (u, v) = (side(&form[..i]), side(&form[i + 1..]));
                if u.len() <= max_len {
                    lefts.insert(u);
                }
                if v.len() <= max_len {
                    rights.insert(v);
                }
            }
        }
        if form.len() > 2 * max_len + 3 || seen.len() > 100_000 {
            continue;
        }
        for &i in &nts {
            let Sym::Nt(n) = &form[i] else { unreachable!() };
            for p in g.productions.iter().filter(|p| &p.lhs == n) {
                let mut next: Vec<Sym> = form[..i].to_vec();
                next.extend(p.rhs.iter().cloned());
                next.extend(form[i + 1..].iter().cloned());
                if seen.insert(next.clone()) {
                    queue.push(next);
                }
            }
        }
    }
    (lefts, rights)
}

fn has_noncommuting_pair(words: &BTreeSet<String>) -> bool {
    words.iter().any(|u| {
        words
            .iter()
            .any(|v| format!("{u}{v}") != format!("{v}{u}"))
    })
}

#[test]
fn boundedness_verdict_matches_brute_force_pump_search() {
    let mut corpus: Vec<(String, ZGrammar)> = vec![("g0".into(), g0())];
    for seed in 0..25 {
        corpus.push((format!("rand{seed}"), random_zgrammar(seed)));
    }
    for (name, g) in corpus {
        let t = g.forget_effects().trimmed();
        if t.nonterminals.len() > 4 {
            continue;
        }
        let caps = DecisionCaps::default();
        let verdict = cfg_bounded(&t, &caps);
        let brute_pair = t.nonterminals.iter().any(|a| {
            let (l, r) = brute_pump_side_words(&t, a, 6);
            has_noncommuting_pair(&l) || has_noncommuting_pair(&r)
        });
        match verdict {
            BaseOutcome::Holds(_) => {
                assert!(!brute_pair, "{name}: bounded verdict but brute force found a pair")
            }
            BaseOutcome::Fails(pair) => {
                let [w, u] = &pair[..] else {
                    panic!("{name}: missing witness pair")
                };
                assert_ne!(format!("{w}{u}"), format!("{u}{w}"), "{name}: bogus witness");
            }
            BaseOutcome::Unknown => panic!("{name}: boundedness capped out"),
        }
    }
}

fn finite_grammar(words: &BTreeSet<String>) -> ZGrammar {
    let s = "S".to_string();
    ZGrammar {
        nonterminals: [s.clone()].into(),
        terminals: ['a', 'b'].into(),
        start: s.clone(),
        dimension: 0,
        productions: words
            .iter()
            .enumerate()
            .map(|(i, w)| Production {
                id: format!("w{i}"),
                lhs: s.clone(),
                rhs: w.chars().map(Sym::T).collect(),
                effect: SparseVec::new(),
            })
            .collect(),
    }
}

fn factors(words: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for w in words {
        for i in 0..=w.len() {
            for j in i..=w.len() {
                out.insert(w[i..j].to_string());
            }
        }
    }
    out
}

#[test]
fn predicate_axioms_on_finite_samples() {
    let preds = [
        PredicateSpec::nonempty(),
        PredicateSpec::infinite(),
        PredicateSpec::notbounded(),
        PredicateSpec::factor_universal(),
        PredicateSpec::occurs('a'),
    ];
    let caps = DecisionCaps::default();
    let base = |pred: &PredicateSpec, words: &BTreeSet<String>| -> bool {
        match pred.base_nfa(&finite_grammar(words), &caps) {
            BaseOutcome::Holds(_) => true,
            BaseOutcome::Fails(_) => false,
            BaseOutcome::Unknown => panic!("{}: base capped on finite language", pred.name),
        }
    };
    for pair in 0..50u64 {
        let k = random_finite_language(2 * pair, 8, 4);
        let l = random_finite_language(2 * pair + 1, 8, 4);
        let union: BTreeSet<String> = k.union(&l).cloned().collect();
        let concat: BTreeSet<String> = k
            .iter()
            .flat_map(|u| l.iter().map(move |v| format!("{u}{v}")))
            .collect();
        for pred in &preds {
            if base(pred, &union) {
                assert!(
                    base(pred, &k) || base(pred, &l),
                    "{}: union-primality fails on pair {pair}",
                    pred.name
                );
            }
            if base(pred, &concat) {
                assert!(
                    base(pred, &k) || base(pred, &l),
                    "{}: concatenation-primality fails on pair {pair}",
                    pred.name
                );
            }
            assert_eq!(
                base(pred, &l),
                base(pred, &factors(&l)),
                "{}: factor closure changes the base verdict on pair {pair}",
                pred.name
            );
        }
    }
}

#[test]
fn pump_side_languages_grow_with_cancelable_set() {
    for seed in 0..15 {
        let g = random_zgrammar(seed).trimmed();
        let m: BTreeSet<String> = g.nonterminals.clone();
        if m.is_empty() {
            continue;
        }
        let q = cancelable_productions(&g, &m, 64).cancelable;
        for drop in &q {
            let smaller: BTreeSet<String> = q.iter().filter(|p| *p != drop).cloned().collect();
            for a in &m {
                let small = words_of(&l_aq(&g, a, &smaller), 5);
                let full = words_of(&l_aq(&g, a, &q), 5);
                assert!(
                    small.is_subset(&full),
                    "seed {seed}: shrinking the cancelable set grew l_({a})"
                );
            }
        }
    }
}

#[test]
fn factor_universality_base_examples() {
    let caps = DecisionCaps::default();
    let s = "S".to_string();
    let ab_star = ZGrammar {
        nonterminals: [s.clone()].into(),
        terminals: ['a', 'b'].into(),
        start: s.clone(),
        dimension: 0,
        productions: vec![
            Production {
                id: "stop".into(),
                lhs: s.clone(),
                rhs: vec![],
                effect: SparseVec::new(),
            },
            Production {
                id: "ab".into(),
                lhs: s.clone(),
                rhs: vec![Sym::T('a'), Sym::T('b'), Sym::Nt(s.clone())],
                effect: SparseVec::new(),
            },
        ],
    };
    match nfa_factor_universal(&ab_star, &caps) {
        BaseOutcome::Fails(witness) => {
            let [w] = &witness[..] else { panic!("missing witness word") };
            for k in 0..8 {
                assert!(!"ab".repeat(k).contains(w), "{w} is a factor of (ab)^8");
            }
        }
        other => panic!("expected failure on (ab)*, got {other:?}"),
    }
    let sigma_star = ZGrammar {
        productions: vec![
            Production {
                id: "stop".into(),
                lhs: s.clone(),
                rhs: vec![],
                effect: SparseVec::new(),
            },
            Production {
                id: "a".into(),
                lhs: s.clone(),
                rhs: vec![Sym::T('a'), Sym::Nt(s.clone())],
                effect: SparseVec::new(),
            },
            Production {
                id: "b".into(),
                lhs: s.clone(),
                rhs: vec![Sym::T('b'), Sym::Nt(s.clone())],
                effect: SparseVec::new(),
            },
        ],
        ..ab_star.clone()
    };
    assert!(matches!(
        nfa_factor_universal(&sigma_star, &caps),
        BaseOutcome::Holds(_)
    ));
}

#[test]
fn decide_agrees_with_enumeration_on_fixtures() {
    let corpus: Vec<(&str, Model)> = vec![
        ("anbn", Model::Rbca(fx_anbn())),
        ("eqab", Model::Rbca(fx_eqab())),
        ("fin", Model::Rbca(fx_fin())),
        ("blocks", Model::Rbca(fx_blocks())),
        ("blocks_a", Model::Rbca(fx_blocks_a())),
    ];
    for (name, model) in corpus {
        let at8 = enumerate_language(&model, 8, &SimCaps::for_len(8));
        let at10 = enumerate_language(&model, 10, &SimCaps::for_len(10));
        assert!(at8.exact && at10.exact, "{name}: enumeration capped");
        let growing = at10.words.len() > at8.words.len();
        assert_eq!(
            decide(&model, PredicateSpec::infinite()),
            if growing { Tri::Yes } else { Tri::No },
            "{name}: infinity verdict disagrees with enumeration growth"
        );
        assert_eq!(
            decide(&model, PredicateSpec::nonempty()),
            if at8.words.is_empty() { Tri::No } else { Tri::Yes },
            "{name}: nonemptiness verdict disagrees with enumeration"
        );
    }
}

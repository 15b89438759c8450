use std::collections::BTreeSet;

use rbca_core::fixtures::*;
use rbca_core::models::{accepts, enumerate_language, validate, Model, SimCaps, Tri};

fn words(model: &Model, max_len: usize) -> BTreeSet<String> {
    let caps = SimCaps::for_len(max_len);
    let r = enumerate_language(model, max_len, &caps);
    assert!(r.exact, "enumeration hit a cap");
    r.words
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn anbn_language() {
    let m = Model::Rbca(fx_anbn());
    assert_eq!(words(&m, 6), set(&["", "ab", "aabb", "aaabbb"]));
    assert_eq!(accepts(&m, "aabb", &SimCaps::for_len(4)), Tri::Yes);
    assert_eq!(accepts(&m, "aab", &SimCaps::for_len(3)), Tri::No);
}

#[test]
fn eqab_language() {
    let m = Model::Rbca(fx_eqab());
    let w = words(&m, 4);
    assert_eq!(w.len(), 9);
    for x in &w {
        let a = x.chars().filter(|&c| c == 'a').count();
        let b = x.chars().filter(|&c| c == 'b').count();
        assert_eq!(a, b, "{x}");
    }
}

#[test]
fn anbn3_language() {
    let m = Model::Rbca(fx_anbn3());
    let w = words(&m, 6);
    assert!(w.contains(""));
    assert!(w.contains("aabb"));
    assert!(w.contains("abab"));
    assert!(w.contains("aababb"));
    assert!(!w.contains("ba"));
    assert!(!w.contains("abba"));
    for x in &w {
        let a = x.chars().filter(|&c| c == 'a').count();
        let b = x.chars().filter(|&c| c == 'b').count();
        assert_eq!(a, b, "{x}");
    }
}

#[test]
fn anbncn_language() {
    let m = Model::Prbca(fx_anbncn());
    assert_eq!(words(&m, 6), set(&["", "abc", "aabbcc"]));
}

#[test]
fn fin_language() {
    let m = Model::Rbca(fx_fin());
    assert_eq!(words(&m, 5), set(&["a", "ab"]));
}

#[test]
fn blocks_language() {
    let m = Model::Rbca(fx_blocks());
    let w = words(&m, 3);
    assert!(w.contains(""));
    assert!(w.contains("#"));
    assert!(w.contains("ab#"));
    assert!(w.contains("###"));
    assert!(!w.contains("a"));
    assert!(!w.contains("#a"));
}

#[test]
fn blocks_a_language() {
    let m = Model::Rbca(fx_blocks_a());
    let w = words(&m, 4);
    assert!(w.contains(""));
    assert!(w.contains("a#"));
    assert!(w.contains("a#a#"));
    assert!(w.contains("ba#"));
    assert!(!w.contains("#"));
    assert!(!w.contains("b#"));
    for x in &w {
        assert!(x.is_empty() || x.ends_with("a#"), "{x}");
    }
}

#[test]
fn g0_language() {
    let m = Model::ZGrammar(g0());
    let w = words(&m, 4);
    assert_eq!(w, set(&["", "acdb", "cabd"]));
}

#[test]
fn fixtures_validate_clean() {
    for m in [
        Model::Rbca(fx_anbn()),
        Model::Rbca(fx_eqab()),
        Model::Rbca(fx_anbn3()),
        Model::Prbca(fx_anbncn()),
        Model::Rbca(fx_fin()),
        Model::Rbca(fx_blocks()),
        Model::Rbca(fx_blocks_a()),
        Model::ZGrammar(g0()),
    ] {
        let errors: Vec<_> = validate(&m).into_iter().filter(|d| d.is_error).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }
}

#[test]
fn enumeration_monotone() {
    for seed in 0..10u64 {
        let m = Model::Rbca(random_rbca(seed));
        let small = words(&m, 4);
        let big = words(&m, 5);
        assert!(small.is_subset(&big), "seed {seed}");
    }
}

#[test]
fn reversal_bound_enforced() {
    // fx_anbn3 with the bound lowered to 1 only accepts single-block words.
    let mut m = fx_anbn3();
    m.reversal_bound = 1;
    let w = words(&Model::Rbca(m), 6);
    assert_eq!(w, set(&["", "ab", "aabb", "aaabbb"]));
}

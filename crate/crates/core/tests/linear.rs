use std::collections::{BTreeMap, BTreeSet};

use rbca_core::fixtures::{g0, random_zgrammar};
use rbca_core::linear::{
    assemble_derivation, boundary, counter_effect, decompose_flow, derivation_feasible, is_flow,
    solve_feasibility, FeasResult, FlowError, LinearSystem, ProdVector, Rel,
};
use rbca_core::models::{SparseVec, ZGrammar};

fn pv(entries: &[(&str, u64)]) -> ProdVector {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn parikh_sum(trees: &[rbca_core::models::DerivationTree]) -> ProdVector {
    let mut total: ProdVector = BTreeMap::new();
    for t in trees {
        for (id, c) in t.parikh() {
            *total.entry(id).or_insert(0) += c;
        }
    }
    total
}

#[test]
fn boundary_counts_nonterminal_production_and_consumption() {
    let g = g0();
    assert!(boundary(&g, &pv(&[("p1", 1)])).is_empty());
    assert_eq!(
        boundary(&g, &pv(&[("p2", 1)])),
        BTreeMap::from([("S".to_string(), -1)])
    );
    assert_eq!(
        boundary(&g, &pv(&[("p1", 1), ("p2", 1), ("p3", 1)])),
        BTreeMap::from([("S".to_string(), -1)])
    );
}

#[test]
fn counter_effect_is_linear_in_counts() {
    let g = g0();
    assert_eq!(counter_effect(&g, &pv(&[("p1", 1)])), SparseVec::unit(0, 1));
    assert_eq!(counter_effect(&g, &pv(&[("p1", 2)])), SparseVec::unit(0, 2));
    assert_eq!(
        counter_effect(&g, &pv(&[("p1", 1), ("p3", 1)])),
        SparseVec::new()
    );
}

#[test]
fn flow_predicate_matches_boundary() {
    let g = g0();
    assert!(is_flow(&g, &pv(&[("p1", 1)])));
    assert!(!is_flow(&g, &pv(&[("p2", 1)])));
    assert!(is_flow(&g, &pv(&[("p1", 1), ("p3", 1)])));
    assert!(is_flow(&g, &pv(&[])));
}

#[test]
fn flow_decomposition_examples() {
    let g = g0();

    let pumps = decompose_flow(&g, &pv(&[("p1", 2)])).unwrap();
    assert_eq!(pumps.len(), 2);
    for p in &pumps {
        assert!(p.is_pump());
        assert_eq!(p.parikh(), pv(&[("p1", 1)]));
    }

    let flow = pv(&[("p1", 1), ("p3", 1)]);
    let pumps = decompose_flow(&g, &flow).unwrap();
    assert!(pumps.iter().all(|p| p.is_pump()));
    assert_eq!(parikh_sum(&pumps), flow);

    assert_eq!(decompose_flow(&g, &pv(&[])), Ok(Vec::new()));
    assert_eq!(decompose_flow(&g, &pv(&[("p2", 1)])), Err(FlowError::NotAFlow));
}

fn flows_with_small_entries(g: &ZGrammar, limit: usize) -> Vec<ProdVector> {
    let ids: Vec<&str> = g.productions.iter().map(|p| p.id.as_str()).collect();
    let mut found = Vec::new();
    let mut counts = vec![0u64; ids.len()];
    'outer: loop {
        if counts.iter().any(|&c| c > 0) {
            let v: ProdVector = ids
                .iter()
                .zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(id, &c)| (id.to_string(), c))
                .collect();
            if is_flow(g, &v) {
                found.push(v);
                if found.len() == limit {
                    return found;
                }
            }
        }
        for c in counts.iter_mut() {
            if *c < 3 {
                *c += 1;
                continue 'outer;
            }
            *c = 0;
        }
        return found;
    }
}

#[test]
fn random_flows_decompose_into_pumps_with_preserved_sum() {
    let mut checked = 0;
    for seed in 0..200u64 {
        if checked >= 100 {
            break;
        }
        let g = random_zgrammar(seed);
        for flow in flows_with_small_entries(&g, 10) {
            let pumps = decompose_flow(&g, &flow).unwrap();
            assert!(pumps.iter().all(|p| p.is_pump()));
            assert_eq!(parikh_sum(&pumps), flow);
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} flows found");
}

#[test]
fn solver_finds_unique_small_solution() {
    let mut sys = LinearSystem::new(vec!["x".to_string(), "y".to_string()]);
    sys.push_row(vec![2, -1], Rel::Eq, 0);
    sys.push_row(vec![1, 1], Rel::Eq, 3);
    assert_eq!(
        solve_feasibility(&sys, 8),
        FeasResult::Solution(pv(&[("x", 1), ("y", 2)]))
    );
}

#[test]
fn solver_rejects_parity_and_rank_infeasibility() {
    let mut sys = LinearSystem::new(vec!["x".to_string()]);
    sys.push_row(vec![2], Rel::Eq, 1);
    assert_eq!(solve_feasibility(&sys, 8), FeasResult::Infeasible);

    let mut sys = LinearSystem::new(vec!["x".to_string(), "y".to_string()]);
    sys.push_row(vec![1, 1], Rel::Eq, 1);
    sys.push_row(vec![1, 1], Rel::Eq, 2);
    assert_eq!(solve_feasibility(&sys, 8), FeasResult::Infeasible);
}

#[test]
fn solver_certifies_rationally_empty_inequalities() {
    let mut sys = LinearSystem::new(vec!["x".to_string()]);
    sys.push_row(vec![1], Rel::Ge, 1);
    sys.push_row(vec![-1], Rel::Ge, 0);
    assert_eq!(solve_feasibility(&sys, 8), FeasResult::Infeasible);
}

#[test]
fn solver_reports_unknown_when_branching_is_capped() {
    // 2x − 2y = 1 written as two inequalities: rationally feasible, no
    // integer point, and no equality row for the divisibility certificate.
    let mut sys = LinearSystem::new(vec!["x".to_string(), "y".to_string()]);
    sys.push_row(vec![2, -2], Rel::Ge, 1);
    sys.push_row(vec![-2, 2], Rel::Ge, -1);
    assert_eq!(solve_feasibility(&sys, 8), FeasResult::Unknown);
}

#[test]
fn cancelability_system_for_matched_brackets() {
    let g = g0();
    let vars: Vec<String> = g.productions.iter().map(|p| p.id.clone()).collect();
    let mut sys = LinearSystem::new(vars.clone());
    for nt in &g.nonterminals {
        let coeffs: Vec<i64> = vars
            .iter()
            .map(|id| {
                let v = pv(&[(id, 1)]);
                *boundary(&g, &v).get(nt).unwrap_or(&0)
            })
            .collect();
        sys.push_row(coeffs, Rel::Eq, 0);
    }
    let coeffs: Vec<i64> = vars
        .iter()
        .map(|id| counter_effect(&g, &pv(&[(id, 1)])).get(0))
        .collect();
    sys.push_row(coeffs, Rel::Eq, 0);
    sys.lower[0] = 1;
    assert_eq!(
        solve_feasibility(&sys, 4),
        FeasResult::Solution(pv(&[("p1", 1), ("p3", 1)]))
    );
}

#[test]
fn derivation_feasibility_on_matched_brackets() {
    let g = g0();
    let m: BTreeSet<String> = ["S".to_string()].into();
    assert_eq!(
        derivation_feasible(&g, &m, true, 64),
        FeasResult::Solution(pv(&[("p1", 1), ("p2", 1), ("p3", 1)]))
    );

    let mut restricted = g.clone();
    restricted.productions.retain(|p| p.id != "p3");
    assert_eq!(
        derivation_feasible(&restricted, &m, true, 64),
        FeasResult::Solution(pv(&[("p2", 1)]))
    );

    assert_eq!(
        derivation_feasible(&g, &BTreeSet::new(), true, 64),
        FeasResult::Infeasible
    );
}

#[test]
fn feasible_multisets_assemble_into_complete_derivations() {
    let g = g0();
    let m: BTreeSet<String> = ["S".to_string()].into();
    let FeasResult::Solution(x) = derivation_feasible(&g, &m, true, 64) else {
        panic!("expected a solution");
    };
    let tree = assemble_derivation(&g, &x).unwrap();
    assert!(tree.is_complete(&g));
    let mut letters: Vec<char> = tree.yield_word().chars().collect();
    letters.sort_unstable();
    assert_eq!(letters, vec!['a', 'b', 'c', 'd']);

    for seed in 0..30u64 {
        let g = random_zgrammar(seed);
        let m: BTreeSet<String> = [g.start.clone()].into();
        if let FeasResult::Solution(x) = derivation_feasible(&g, &m, true, 16) {
            let tree = assemble_derivation(&g, &x).unwrap();
            assert!(tree.is_complete(&g));
        }
    }
}

use std::collections::BTreeSet;

use rbca_core::fixtures::g0;
use rbca_core::linear::{decompose_flow, derivation_feasible_cut, FeasResult};
use rbca_core::normalize::cnf_zgrammar;
use rbca_core::unbounded::{cancelable_productions, embed_factor_witness};

fn main() {
    let cnf = cnf_zgrammar(&g0()).unwrap().grammar;
    let m: BTreeSet<String> = cnf.nonterminals.clone();
    let cancel = cancelable_productions(&cnf, &m, 64);
    let p = "cnf_bin_p1_0".to_string();
    println!("flow[{p}] = {:?}", cancel.flows[&p]);
    let pumps = decompose_flow(&cnf, &cancel.flows[&p]).unwrap();
    for tau in &pumps {
        println!("pump parikh {:?} sides {:?}", tau.parikh(), tau.yield_sides());
    }
    let tau = &pumps[0];
    let root = tau.root_label().unwrap().to_string();
    let host = derivation_feasible_cut(&cnf, &m, &[root], true, 64);
    if let FeasResult::Solution(x) = &host {
        println!("host x = {x:?}");
    }
    let full = embed_factor_witness(&cnf, &m, &cancel.flows, tau, 64).unwrap();
    println!("yield = {}", full.yield_word());
}

//! Decision pipeline for unboundedness predicates: letter preprocessing,
//! realizable nonterminal sets, cancelable productions, pump-side language
//! extraction, base deciders on plain grammars and automata, and witness
//! embedding.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::convert::to_zgrammar_model;
use crate::linear::{
    decompose_flow, derivation_feasible, derivation_feasible_cut, assemble_derivation,
    FeasResult, LinearSystem, ProdVector, Rel,
};
use crate::models::{
    enumerate_language, DerivationTree, Model, Production, SimCaps, Sym, Tri, ZGrammar,
};
use crate::normalize::{intersect_zgrammar_aut, RegAut};

/// Resource limits for the decision pipeline.
#[derive(Clone, Debug)]
pub struct DecisionCaps {
    /// Box bound for the integer feasibility solver.
    pub solve_cap: i64,
    /// Maximum word length used when hunting for witness words.
    pub word_len: usize,
    /// Maximum number of subset-construction states during universality
    /// checks.
    pub state_cap: usize,
    /// Maximum number of productions in a searched pump.
    pub pump_budget: usize,
}

impl Default for DecisionCaps {
    fn default() -> Self {
        DecisionCaps {
            solve_cap: 64,
            word_len: 8,
            state_cap: 4096,
            pump_budget: 24,
        }
    }
}

/// Verdict of a base decider, with witness words where applicable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseOutcome {
    Holds(Vec<String>),
    Fails(Vec<String>),
    Unknown,
}

#[derive(Clone, Debug)]
enum BaseKind {
    Nonempty,
    Infinite,
    NotBounded,
    FactorUniversal,
    /// Constant `fails`: the predicate's truth is fully captured by the
    /// letter preprocessing step.
    Never,
}

/// A language predicate given by its truth on the empty word and single
/// letters plus a base decider run on extracted pump-side languages.
#[derive(Clone, Debug)]
pub struct PredicateSpec {
    pub name: String,
    pub holds_on_epsilon: bool,
    pub requires_nfa_base: bool,
    base: BaseKind,
    sigma1_letter: Option<char>,
}

impl PredicateSpec {
    pub fn nonempty() -> PredicateSpec {
        PredicateSpec {
            name: "nonempty".to_string(),
            holds_on_epsilon: true,
            requires_nfa_base: false,
            base: BaseKind::Nonempty,
            sigma1_letter: None,
        }
    }

    pub fn infinite() -> PredicateSpec {
        PredicateSpec {
            name: "infinite".to_string(),
            holds_on_epsilon: false,
            requires_nfa_base: false,
            base: BaseKind::Infinite,
            sigma1_letter: None,
        }
    }

    pub fn notbounded() -> PredicateSpec {
        PredicateSpec {
            name: "notbounded".to_string(),
            holds_on_epsilon: false,
            requires_nfa_base: false,
            base: BaseKind::NotBounded,
            sigma1_letter: None,
        }
    }

    pub fn factor_universal() -> PredicateSpec {
        PredicateSpec {
            name: "factoruniversal".to_string(),
            holds_on_epsilon: false,
            requires_nfa_base: true,
            base: BaseKind::FactorUniversal,
            sigma1_letter: None,
        }
    }

    /// Test predicate: holds iff some word of the language contains `c`.
    pub fn occurs(c: char) -> PredicateSpec {
        PredicateSpec {
            name: format!("occurs-{c}"),
            holds_on_epsilon: false,
            requires_nfa_base: false,
            base: BaseKind::Never,
            sigma1_letter: Some(c),
        }
    }

    pub fn by_name(name: &str) -> Option<PredicateSpec> {
        match name {
            "nonempty" => Some(PredicateSpec::nonempty()),
            "infinite" => Some(PredicateSpec::infinite()),
            "notbounded" => Some(PredicateSpec::notbounded()),
            "factoruniversal" => Some(PredicateSpec::factor_universal()),
            _ => {
                let rest = name.strip_prefix("occurs-")?;
                let mut chars = rest.chars();
                let c = chars.next()?;
                chars.next().is_none().then(|| PredicateSpec::occurs(c))
            }
        }
    }

    /// Truth of the predicate on the singleton language of one letter.
    pub fn holds_on_letter(&self, c: char) -> bool {
        match self.base {
            BaseKind::Nonempty => true,
            BaseKind::Never => self.sigma1_letter == Some(c),
            _ => false,
        }
    }

    /// Base decider on an extracted pump-side grammar.
    pub fn base_cfg(&self, g: &ZGrammar, caps: &DecisionCaps) -> BaseOutcome {
        match self.base {
            BaseKind::Nonempty => {
                if cfg_nonempty(g) {
                    BaseOutcome::Holds(Vec::new())
                } else {
                    BaseOutcome::Fails(Vec::new())
                }
            }
            BaseKind::Infinite => cfg_infinite(g, caps),
            BaseKind::NotBounded => cfg_notbounded(g, caps),
            BaseKind::FactorUniversal => BaseOutcome::Unknown,
            BaseKind::Never => BaseOutcome::Fails(Vec::new()),
        }
    }

    /// Base decider for left-linear inputs; factor universality is only
    /// available here.
    pub fn base_nfa(&self, g: &ZGrammar, caps: &DecisionCaps) -> BaseOutcome {
        match self.base {
            BaseKind::FactorUniversal => nfa_factor_universal(g, caps),
            _ => self.base_cfg(g, caps),
        }
    }
}

// ---------------------------------------------------------------------------
// Realizability and cancelability
// ---------------------------------------------------------------------------

/// Whether some complete zero-effect derivation uses exactly the
/// nonterminals `M`.
pub fn is_realizable(g: &ZGrammar, m: &BTreeSet<String>, cap: i64) -> Tri {
    match derivation_feasible(g, m, true, cap) {
        FeasResult::Solution(_) => Tri::Yes,
        FeasResult::Infeasible => Tri::No,
        FeasResult::Unknown => Tri::Unknown,
    }
}

#[derive(Clone, Debug, Default)]
pub struct CancelResult {
    /// Productions occurring in some zero-effect flow over `M`.
    pub cancelable: BTreeSet<String>,
    /// One witnessing flow per cancelable production.
    pub flows: BTreeMap<String, ProdVector>,
    /// Whether any per-production solve capped out, in which case
    /// `cancelable` is only a lower bound.
    pub capped: bool,
}

/// The productions usable in zero-total-effect pump collections over `M`,
/// each with a witnessing flow.
pub fn cancelable_productions(g: &ZGrammar, m: &BTreeSet<String>, cap: i64) -> CancelResult {
    let pm = crate::linear::productions_over(g, m);
    let nts: Vec<&String> = m.iter().collect();
    let mut out = CancelResult::default();
    for target in &pm {
        let mut sys = LinearSystem::new(pm.clone());
        for a in &nts {
            let coeffs: Vec<i64> = pm
                .iter()
                .map(|id| {
                    let p = g.production(id).unwrap();
                    let mut c = 0i64;
                    if &p.lhs == *a {
                        c -= 1;
                    }
                    for s in &p.rhs {
                        if matches!(s, Sym::Nt(n) if n == *a) {
                            c += 1;
                        }
                    }
                    c
                })
                .collect();
            sys.push_row(coeffs, Rel::Eq, 0);
        }
        for coord in 0..g.dimension {
            let coeffs: Vec<i64> = pm
                .iter()
                .map(|id| g.production(id).unwrap().effect.get(coord as u32))
                .collect();
            sys.push_row(coeffs, Rel::Eq, 0);
        }
        let ix = pm.iter().position(|id| id == target).unwrap();
        sys.lower[ix] = 1;
        match crate::linear::solve_feasibility(&sys, cap) {
            FeasResult::Solution(f) => {
                out.cancelable.insert(target.clone());
                out.flows.insert(target.clone(), f);
            }
            FeasResult::Infeasible => {}
            FeasResult::Unknown => out.capped = true,
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Pump-side languages
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn hat(b: &str, side: Side) -> String {
    match side {
        Side::Left => format!("{b}~hatL"),
        Side::Right => format!("{b}~hatR"),
    }
}

fn side_productions(
    g: &ZGrammar,
    q: &BTreeSet<String>,
    side: Side,
    productions: &mut Vec<Production>,
    nonterminals: &mut BTreeSet<String>,
) {
    for id in q {
        let p = g.production(id).expect("unknown production id");
        for (i, sym) in p.rhs.iter().enumerate() {
            let Sym::Nt(y) = sym else { continue };
            let rhs: Vec<Sym> = match side {
                Side::Left => p.rhs[..i]
                    .iter()
                    .cloned()
                    .chain(core::iter::once(Sym::Nt(hat(y, side))))
                    .collect(),
                Side::Right => core::iter::once(Sym::Nt(hat(y, side)))
                    .chain(p.rhs[i + 1..].iter().cloned())
                    .collect(),
            };
            let tag = match side {
                Side::Left => "L",
                Side::Right => "R",
            };
            nonterminals.insert(hat(&p.lhs, side));
            nonterminals.insert(hat(y, side));
            productions.push(Production {
                id: format!("{id}~{tag}{i}"),
                lhs: hat(&p.lhs, side),
                rhs,
                effect: crate::models::SparseVec::new(),
            });
        }
    }
    // Fully expanded plain copies for the off-spine nonterminals.
    for id in q {
        let p = g.production(id).unwrap();
        nonterminals.insert(p.lhs.clone());
        for s in &p.rhs {
            if let Sym::Nt(n) = s {
                nonterminals.insert(n.clone());
            }
        }
        productions.push(Production {
            id: format!("{id}~w"),
            lhs: p.lhs.clone(),
            rhs: p.rhs.clone(),
            effect: crate::models::SparseVec::new(),
        });
    }
}

/// The words appearing on one side of pumps `A ⇒* uAv` that use only the
/// productions `Q`: a duplicated "spine" copy of each nonterminal descends
/// toward the pump hole, and the hole itself rewrites to ε.
pub fn pump_side_grammar(g: &ZGrammar, a: &str, q: &BTreeSet<String>, side: Side) -> ZGrammar {
    let mut productions = Vec::new();
    let mut nonterminals: BTreeSet<String> = BTreeSet::new();
    let start = hat(a, side);
    nonterminals.insert(start.clone());
    productions.push(Production {
        id: "hat~eps".to_string(),
        lhs: start.clone(),
        rhs: Vec::new(),
        effect: crate::models::SparseVec::new(),
    });
    side_productions(g, q, side, &mut productions, &mut nonterminals);
    ZGrammar {
        nonterminals,
        terminals: g.terminals.clone(),
        start,
        dimension: 0,
        productions,
    }
    .trimmed()
}

/// Union of both pump sides of `A` over `Q`.
pub fn l_aq(g: &ZGrammar, a: &str, q: &BTreeSet<String>) -> ZGrammar {
    let mut productions = Vec::new();
    let mut nonterminals: BTreeSet<String> = BTreeSet::new();
    for side in [Side::Left, Side::Right] {
        let hat_start = hat(a, side);
        nonterminals.insert(hat_start.clone());
        let tag = match side {
            Side::Left => "L",
            Side::Right => "R",
        };
        productions.push(Production {
            id: format!("hat~eps~{tag}"),
            lhs: hat_start,
            rhs: Vec::new(),
            effect: crate::models::SparseVec::new(),
        });
        side_productions(g, q, side, &mut productions, &mut nonterminals);
    }
    // The two plain copies coincide; drop the duplicates.
    let mut seen = BTreeSet::new();
    productions.retain(|p| seen.insert(p.id.clone()));
    let start = "U~start".to_string();
    nonterminals.insert(start.clone());
    for (tag, side) in [("L", Side::Left), ("R", Side::Right)] {
        productions.push(Production {
            id: format!("union~{tag}"),
            lhs: start.clone(),
            rhs: alloc::vec![Sym::Nt(hat(a, side))],
            effect: crate::models::SparseVec::new(),
        });
    }
    ZGrammar {
        nonterminals,
        terminals: g.terminals.clone(),
        start,
        dimension: 0,
        productions,
    }
    .trimmed()
}

// ---------------------------------------------------------------------------
// Base deciders
// ---------------------------------------------------------------------------

/// Classical productivity check, ignoring counter effects.
pub fn cfg_nonempty(g: &ZGrammar) -> bool {
    g.productive().contains(&g.start)
}

/// Whether the start symbol derives some word of length at least one.
pub fn cfg_derives_nonempty_word(g: &ZGrammar) -> bool {
    let productive = g.productive();
    let mut wide: BTreeSet<&str> = BTreeSet::new();
    loop {
        let mut changed = false;
        for p in &g.productions {
            if wide.contains(p.lhs.as_str()) {
                continue;
            }
            let usable = p
                .rhs
                .iter()
                .all(|s| s.as_nt().map_or(true, |n| productive.contains(n)));
            let has_width = p.rhs.iter().any(|s| match s {
                Sym::T(_) => true,
                Sym::Nt(n) => wide.contains(n.as_str()),
            });
            if usable && has_width && productive.contains(&p.lhs) {
                wide.insert(&p.lhs);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    wide.contains(g.start.as_str())
}

fn enumerate_words(g: &ZGrammar, max_len: usize) -> (Vec<String>, bool) {
    let r = enumerate_language(
        &Model::ZGrammar(g.forget_effects()),
        max_len,
        &SimCaps::for_len(max_len),
    );
    (r.words.into_iter().collect(), r.exact)
}

/// Shortest period prefix: the smallest `z` with `w ∈ z*`.
pub fn primitive_root(w: &str) -> &str {
    let n = w.len();
    for d in 1..=n {
        if n % d == 0 {
            let z = &w[..d];
            if w.as_bytes().chunks(d).all(|c| c == z.as_bytes()) {
                return z;
            }
        }
    }
    w
}

fn in_star(w: &str, z: &str) -> bool {
    if z.is_empty() {
        return w.is_empty();
    }
    w.len() % z.len() == 0 && w.as_bytes().chunks(z.len()).all(|c| c == z.as_bytes())
}

/// Complement of the cyclic automaton for `z*` over `alphabet`.
fn complement_of_star(z: &str, alphabet: &BTreeSet<char>) -> RegAut {
    let zc: Vec<char> = z.chars().collect();
    let n = zc.len();
    let dead = n;
    let names: Vec<String> = (0..n)
        .map(|i| format!("c{i}"))
        .chain(core::iter::once("dead".to_string()))
        .collect();
    let mut finals = alloc::vec![true; n + 1];
    finals[0] = false;
    let mut edges = Vec::new();
    for i in 0..n {
        for &a in alphabet {
            let t = if a == zc[i] { (i + 1) % n } else { dead };
            edges.push((i, Some(a), t));
        }
    }
    for &a in alphabet {
        edges.push((dead, Some(a), dead));
    }
    RegAut::from_parts(names, 0, finals, edges)
}

/// Whether every pump side of every useful nonterminal stays inside a
/// single primitive power `z*`; any escape yields a non-commuting pair.
pub fn cfg_bounded(g: &ZGrammar, caps: &DecisionCaps) -> BaseOutcome {
    let t = g.forget_effects().trimmed();
    if !cfg_nonempty(&t) {
        return BaseOutcome::Holds(Vec::new());
    }
    let q: BTreeSet<String> = t.productions.iter().map(|p| p.id.clone()).collect();
    let mut capped = false;
    for a in &t.nonterminals {
        for side in [Side::Left, Side::Right] {
            let side_g = pump_side_grammar(&t, a, &q, side);
            if !cfg_derives_nonempty_word(&side_g) {
                continue;
            }
            let (words, _) = enumerate_words(&side_g, caps.word_len);
            let Some(w) = words.iter().filter(|w| !w.is_empty()).min_by_key(|w| w.len())
            else {
                capped = true;
                continue;
            };
            let z = primitive_root(w);
            let escape = intersect_zgrammar_aut(&side_g, &complement_of_star(z, &t.terminals))
                .ok()
                .filter(cfg_nonempty);
            if escape.is_some() {
                match words.iter().find(|u| !in_star(u, z)) {
                    Some(u) => {
                        return BaseOutcome::Fails(alloc::vec![w.clone(), u.clone()]);
                    }
                    None => capped = true,
                }
            }
        }
    }
    if capped {
        BaseOutcome::Unknown
    } else {
        BaseOutcome::Holds(Vec::new())
    }
}

/// Negation of [`cfg_bounded`], with the non-commuting pair as witness.
pub fn cfg_notbounded(g: &ZGrammar, caps: &DecisionCaps) -> BaseOutcome {
    match cfg_bounded(g, caps) {
        BaseOutcome::Holds(_) => BaseOutcome::Fails(Vec::new()),
        BaseOutcome::Fails(pair) => BaseOutcome::Holds(pair),
        BaseOutcome::Unknown => BaseOutcome::Unknown,
    }
}

/// Whether the language is infinite: some useful nonterminal has a pump
/// with nonempty yield.
pub fn cfg_infinite(g: &ZGrammar, caps: &DecisionCaps) -> BaseOutcome {
    let t = g.forget_effects().trimmed();
    if !cfg_nonempty(&t) {
        return BaseOutcome::Fails(Vec::new());
    }
    let q: BTreeSet<String> = t.productions.iter().map(|p| p.id.clone()).collect();
    for a in &t.nonterminals {
        for side in [Side::Left, Side::Right] {
            let side_g = pump_side_grammar(&t, a, &q, side);
            if cfg_derives_nonempty_word(&side_g) {
                let (words, _) = enumerate_words(&side_g, caps.word_len);
                let witness: Vec<String> = words
                    .into_iter()
                    .filter(|w| !w.is_empty())
                    .min_by_key(String::len)
                    .into_iter()
                    .collect();
                return BaseOutcome::Holds(witness);
            }
        }
    }
    BaseOutcome::Fails(Vec::new())
}

/// Factor universality of the language of a zero-effect left-linear
/// grammar: close the automaton under factors, then check universality by
/// capped determinization.
pub fn nfa_factor_universal(g: &ZGrammar, caps: &DecisionCaps) -> BaseOutcome {
    let Ok(aut) = RegAut::from_left_linear(&g.forget_effects()) else {
        return BaseOutcome::Unknown;
    };
    if g.terminals.is_empty() {
        return BaseOutcome::Holds(Vec::new());
    }
    let mut succ: Vec<Vec<(Option<char>, usize)>> = alloc::vec![Vec::new(); aut.n];
    for (s, targets) in aut.eps.iter().enumerate() {
        for &t in targets {
            succ[s].push((None, t));
        }
    }
    for (&c, edges) in &aut.letter {
        for &(s, t) in edges {
            succ[s].push((Some(c), t));
        }
    }
    let forward = reach(aut.n, &[aut.initial], |s| {
        succ[s].iter().map(|&(_, t)| t).collect()
    });
    let mut pred: Vec<Vec<usize>> = alloc::vec![Vec::new(); aut.n];
    for (s, outs) in succ.iter().enumerate() {
        for &(_, t) in outs {
            pred[t].push(s);
        }
    }
    let final_states: Vec<usize> = (0..aut.n).filter(|&s| aut.finals[s]).collect();
    let backward = reach(aut.n, &final_states, |s| pred[s].clone());
    let useful: BTreeSet<usize> = (0..aut.n).filter(|s| forward[*s] && backward[*s]).collect();
    if useful.is_empty() {
        return BaseOutcome::Fails(alloc::vec![String::new()]);
    }
    // In the factor closure every useful state is initial and accepting, so
    // universality fails exactly when some letter sequence empties the
    // subset-construction state.
    let eps_close = |set: &mut BTreeSet<usize>| {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &(c, t) in &succ[s] {
                if c.is_none() && set.insert(t) {
                    stack.push(t);
                }
            }
        }
    };
    let mut start: BTreeSet<usize> = useful.clone();
    eps_close(&mut start);
    start.retain(|s| useful.contains(s));
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut queue: Vec<(BTreeSet<usize>, String)> = alloc::vec![(start.clone(), String::new())];
    seen.insert(start);
    while let Some((set, word)) = queue.pop() {
        for &c in &g.terminals {
            let mut next: BTreeSet<usize> = BTreeSet::new();
            for &s in &set {
                for &(lbl, t) in &succ[s] {
                    if lbl == Some(c) {
                        next.insert(t);
                    }
                }
            }
            eps_close(&mut next);
            next.retain(|s| useful.contains(s));
            let mut w = word.clone();
            w.push(c);
            if next.is_empty() {
                return BaseOutcome::Fails(alloc::vec![w]);
            }
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= caps.state_cap {
                return BaseOutcome::Unknown;
            }
            seen.insert(next.clone());
            queue.push((next, w));
        }
    }
    BaseOutcome::Holds(Vec::new())
}

fn reach(n: usize, seeds: &[usize], next: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = alloc::vec![false; n];
    let mut stack: Vec<usize> = seeds.to_vec();
    for &s in seeds {
        seen[s] = true;
    }
    while let Some(s) = stack.pop() {
        for t in next(s) {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// Witness embedding
// ---------------------------------------------------------------------------

/// Searches left-linear pumps `A ⇒*_Q target·A` by walking the production
/// graph while matching the target prefix.
pub fn find_pump_ll(
    g: &ZGrammar,
    a: &str,
    q: &BTreeSet<String>,
    target: &str,
) -> Option<DerivationTree> {
    let mut stack: Vec<(String, usize, Vec<String>)> =
        alloc::vec![(a.to_string(), 0, Vec::new())];
    let mut seen: BTreeSet<(String, usize)> = BTreeSet::new();
    while let Some((cur, consumed, path)) = stack.pop() {
        for id in q.iter().rev() {
            let p = g.production(id).unwrap();
            if p.lhs != cur {
                continue;
            }
            let Some(Sym::Nt(next_nt)) = p.rhs.last() else { continue };
            let prefix: String = p
                .rhs
                .iter()
                .filter_map(|s| match s {
                    Sym::T(c) => Some(*c),
                    Sym::Nt(_) => None,
                })
                .collect();
            let end = consumed + prefix.len();
            if end > target.len() || target[consumed..end] != prefix {
                continue;
            }
            let mut path2 = path.clone();
            path2.push(id.clone());
            if next_nt == a && end == target.len() {
                let mut tree = DerivationTree::of_production(g, &path2[0]).unwrap();
                for pid in &path2[1..] {
                    let sub = DerivationTree::of_production(g, pid).unwrap();
                    let label = sub.root_label().unwrap().to_string();
                    assert!(tree.graft(&label, sub));
                }
                return Some(tree);
            }
            if seen.insert((next_nt.clone(), end)) {
                stack.push((next_nt.clone(), end, path2));
            }
        }
    }
    None
}

/// Smallest-available flow dominating `phi` componentwise, so the excess
/// `f − φ` balances the pump's boundary and counter effect with as little
/// extra material as possible.
fn covering_flow(
    g: &ZGrammar,
    m: &BTreeSet<String>,
    phi: &ProdVector,
    cap: i64,
) -> Option<ProdVector> {
    let pm = crate::linear::productions_over(g, m);
    if phi.keys().any(|p| !pm.contains(p)) {
        return None;
    }
    let mut sys = LinearSystem::new(pm.clone());
    for (i, id) in pm.iter().enumerate() {
        sys.lower[i] = phi.get(id).copied().unwrap_or(0) as i64;
    }
    for a in m {
        let coeffs: Vec<i64> = pm
            .iter()
            .map(|id| {
                let p = g.production(id).unwrap();
                let mut c = 0i64;
                if &p.lhs == a {
                    c -= 1;
                }
                for s in &p.rhs {
                    if matches!(s, Sym::Nt(n) if n == a) {
                        c += 1;
                    }
                }
                c
            })
            .collect();
        sys.push_row(coeffs, Rel::Eq, 0);
    }
    for coord in 0..g.dimension {
        let coeffs: Vec<i64> = pm
            .iter()
            .map(|id| g.production(id).unwrap().effect.get(coord as u32))
            .collect();
        sys.push_row(coeffs, Rel::Eq, 0);
    }
    match crate::linear::solve_feasibility(&sys, cap) {
        FeasResult::Solution(f) => {
            let mut rest = f;
            for (p, &c) in phi {
                let left = rest.get(p).copied().unwrap_or(0).checked_sub(c)?;
                if left == 0 {
                    rest.remove(p);
                } else {
                    rest.insert(p.clone(), left);
                }
            }
            Some(rest)
        }
        _ => None,
    }
}

/// Fallback cover: one stored flow per production occurrence of `phi`.
fn summed_covering_flow(
    flows: &BTreeMap<String, ProdVector>,
    phi: &ProdVector,
) -> Option<ProdVector> {
    let mut balance: BTreeMap<String, i64> = BTreeMap::new();
    for (p, &count) in phi {
        for (r, &c) in flows.get(p)? {
            *balance.entry(r.clone()).or_insert(0) += count as i64 * c as i64;
        }
        *balance.entry(p.clone()).or_insert(0) -= count as i64;
    }
    if balance.values().any(|&c| c < 0) {
        return None;
    }
    Some(
        balance
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(p, c)| (p, c as u64))
            .collect(),
    )
}

/// Builds a complete derivation whose yield contains both sides of the
/// pump `tau` as factors, by balancing its counter effect with cancelable
/// flows and splicing everything into a realizability witness.
pub fn embed_factor_witness(
    g: &ZGrammar,
    m: &BTreeSet<String>,
    flows: &BTreeMap<String, ProdVector>,
    tau: &DerivationTree,
    cap: i64,
) -> Option<DerivationTree> {
    let phi = tau.parikh();
    if phi.keys().any(|p| !flows.contains_key(p)) {
        return None;
    }
    let f_tau = covering_flow(g, m, &phi, cap)
        .or_else(|| summed_covering_flow(flows, &phi))?;
    let extra = decompose_flow(g, &f_tau).ok()?;
    // The host derivation must visit every pump root so the pumps can be
    // spliced in.
    let mut must: BTreeSet<String> = BTreeSet::new();
    must.insert(tau.root_label()?.to_string());
    for p in &extra {
        must.insert(p.root_label()?.to_string());
    }
    let must: Vec<String> = must.into_iter().collect();
    let FeasResult::Solution(x) = derivation_feasible_cut(g, m, &must, true, cap) else {
        return None;
    };
    let mut main = assemble_derivation(g, &x)?;
    let mut pumps: Vec<DerivationTree> = Vec::new();
    pumps.push(tau.clone());
    pumps.extend(extra);
    loop {
        if pumps.is_empty() {
            break;
        }
        let mut progressed = false;
        let mut rest = Vec::new();
        for pump in pumps {
            let root = pump.root_label()?.to_string();
            let mut wrap = |old: DerivationTree| {
                let mut p = pump.clone();
                assert!(p.graft(&root, old));
                p
            };
            if main.wrap_at(&root, &mut wrap) {
                progressed = true;
            } else {
                rest.push(pump);
            }
        }
        if !progressed {
            return None;
        }
        pumps = rest;
    }
    main.is_complete(g).then_some(main)
}

// ---------------------------------------------------------------------------
// Decision pipeline
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecideError {
    /// The predicate requires an automaton-level base decider but the input
    /// has a pushdown component.
    UnsupportedCombination { predicate: String, model: String },
}

impl core::fmt::Display for DecideError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DecideError::UnsupportedCombination { predicate, model } => write!(
                f,
                "predicate `{predicate}` is undecidable on pushdown inputs ({model})"
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub nonterminals: BTreeSet<String>,
    pub nonterminal: Option<String>,
    pub note: String,
}

#[derive(Clone, Debug, Default)]
pub struct DecisionWitness {
    pub nonterminals: BTreeSet<String>,
    pub nonterminal: Option<String>,
    pub cancelable: BTreeSet<String>,
    pub words: Vec<String>,
    pub derivation: Option<DerivationTree>,
    pub word: Option<String>,
}

#[derive(Clone, Debug)]
pub struct DecisionReport {
    pub outcome: Tri,
    pub witness: Option<DecisionWitness>,
    pub trace: Vec<TraceEntry>,
}

fn allowed_star_grammar(alphabet: &BTreeSet<char>, allowed: &BTreeSet<char>) -> ZGrammar {
    let r = "R".to_string();
    let mut productions = alloc::vec![Production {
        id: "eps".to_string(),
        lhs: r.clone(),
        rhs: Vec::new(),
        effect: crate::models::SparseVec::new(),
    }];
    for &c in allowed {
        productions.push(Production {
            id: format!("c{c}"),
            lhs: r.clone(),
            rhs: alloc::vec![Sym::T(c), Sym::Nt(r.clone())],
            effect: crate::models::SparseVec::new(),
        });
    }
    ZGrammar {
        nonterminals: [r.clone()].into(),
        terminals: alphabet.clone(),
        start: r,
        dimension: 0,
        productions,
    }
}

/// Left-linear grammar for the words over `alphabet` containing at least
/// one letter of `sigma1`.
pub fn contains_letter_grammar(alphabet: &BTreeSet<char>, sigma1: &BTreeSet<char>) -> ZGrammar {
    let a = "A".to_string();
    let b = "B".to_string();
    let mut productions = Vec::new();
    for &c in alphabet {
        productions.push(Production {
            id: format!("pre{c}"),
            lhs: a.clone(),
            rhs: alloc::vec![Sym::T(c), Sym::Nt(a.clone())],
            effect: crate::models::SparseVec::new(),
        });
        productions.push(Production {
            id: format!("post{c}"),
            lhs: b.clone(),
            rhs: alloc::vec![Sym::T(c), Sym::Nt(b.clone())],
            effect: crate::models::SparseVec::new(),
        });
    }
    for &c in sigma1 {
        productions.push(Production {
            id: format!("hit{c}"),
            lhs: a.clone(),
            rhs: alloc::vec![Sym::T(c), Sym::Nt(b.clone())],
            effect: crate::models::SparseVec::new(),
        });
    }
    productions.push(Production {
        id: "eps".to_string(),
        lhs: b.clone(),
        rhs: Vec::new(),
        effect: crate::models::SparseVec::new(),
    });
    ZGrammar {
        nonterminals: [a.clone(), b].into(),
        terminals: alphabet.clone(),
        start: a,
        dimension: 0,
        productions,
    }
}

/// Nonemptiness of the zero-effect-accepting language of `g`, with a
/// witnessing word on success.
fn grammar_nonempty(g: &ZGrammar, cap: i64) -> (Tri, Option<String>) {
    let t = g.trimmed();
    if t.productions.is_empty() {
        return (Tri::No, None);
    }
    let all: BTreeSet<String> = t.nonterminals.clone();
    match derivation_feasible_cut(&t, &all, &[], true, cap) {
        FeasResult::Solution(x) => {
            let word = assemble_derivation(&t, &x).map(|d| d.yield_word());
            (Tri::Yes, word)
        }
        FeasResult::Infeasible => (Tri::No, None),
        FeasResult::Unknown => (Tri::Unknown, None),
    }
}

/// The union of all realizable nonterminal sets, found by asking per
/// nonterminal whether some complete zero-effect derivation uses it.
/// Realizable sets are closed under union (splice one derivation into the
/// other at the start symbol), so this is itself realizable and, by
/// upward closure of the predicate, the only candidate that needs testing.
fn maximal_realizable(g: &ZGrammar, cap: i64) -> (BTreeSet<String>, bool) {
    let all: BTreeSet<String> = g.nonterminals.clone();
    let mut m = BTreeSet::new();
    let mut capped = false;
    for a in &all {
        match derivation_feasible_cut(g, &all, core::slice::from_ref(a), true, cap) {
            FeasResult::Solution(_) => {
                m.insert(a.clone());
            }
            FeasResult::Infeasible => {}
            FeasResult::Unknown => capped = true,
        }
    }
    (m, capped)
}

fn is_pushdown_kind(model: &Model) -> bool {
    match model {
        Model::Prbca(_) | Model::ZPvass(_) => true,
        Model::ZGrammar(g) => !g.is_left_linear(),
        _ => false,
    }
}

/// Theorem-2-style decision procedure for an unboundedness predicate on
/// any supported model.
pub fn decide_predicate(
    model: &Model,
    pred: &PredicateSpec,
    caps: &DecisionCaps,
) -> Result<DecisionReport, DecideError> {
    if pred.requires_nfa_base && is_pushdown_kind(model) {
        return Err(DecideError::UnsupportedCombination {
            predicate: pred.name.clone(),
            model: model.kind_name().to_string(),
        });
    }
    let mut trace: Vec<TraceEntry> = Vec::new();
    let note = |m: &BTreeSet<String>, a: Option<&str>, text: &str| TraceEntry {
        nonterminals: m.clone(),
        nonterminal: a.map(str::to_string),
        note: text.to_string(),
    };
    let mut g = to_zgrammar_model(model);
    let mut saw_unknown = false;

    if pred.holds_on_epsilon {
        let (ne, word) = grammar_nonempty(&g, caps.solve_cap);
        let report = |outcome, witness| DecisionReport {
            outcome,
            witness,
            trace: alloc::vec![],
        };
        return Ok(match ne {
            Tri::Yes => report(
                Tri::Yes,
                Some(DecisionWitness {
                    word,
                    ..DecisionWitness::default()
                }),
            ),
            Tri::No => report(Tri::No, None),
            Tri::Unknown => report(Tri::Unknown, None),
        });
    }

    let alphabet = g.terminals.clone();
    let sigma1: BTreeSet<char> = alphabet
        .iter()
        .copied()
        .filter(|&c| pred.holds_on_letter(c))
        .collect();
    if !sigma1.is_empty() {
        let hit = contains_letter_grammar(&alphabet, &sigma1);
        let g1 = crate::normalize::intersect_zgrammar(&g, &hit)
            .expect("letter filter grammar is left-linear");
        let (ne, word) = grammar_nonempty(&g1, caps.solve_cap);
        match ne {
            Tri::Yes => {
                return Ok(DecisionReport {
                    outcome: Tri::Yes,
                    witness: Some(DecisionWitness {
                        word,
                        ..DecisionWitness::default()
                    }),
                    trace,
                });
            }
            Tri::No => {}
            Tri::Unknown => saw_unknown = true,
        }
        let rest: BTreeSet<char> = alphabet.difference(&sigma1).copied().collect();
        let keep = allowed_star_grammar(&alphabet, &rest);
        g = crate::normalize::intersect_zgrammar(&g, &keep)
            .expect("letter filter grammar is left-linear");
    }

    let g = g.trimmed();
    if !cfg_nonempty(&g) {
        return Ok(DecisionReport {
            outcome: if saw_unknown { Tri::Unknown } else { Tri::No },
            witness: None,
            trace,
        });
    }

    let (m_star, m_capped) = maximal_realizable(&g, caps.solve_cap);
    saw_unknown |= m_capped;
    trace.push(note(&m_star, None, "maximal realizable nonterminal set"));
    if m_star.is_empty() {
        return Ok(DecisionReport {
            outcome: if saw_unknown { Tri::Unknown } else { Tri::No },
            witness: None,
            trace,
        });
    }
    let cancel = cancelable_productions(&g, &m_star, caps.solve_cap);
    saw_unknown |= cancel.capped;
    let left_linear = g.is_left_linear();

    for a in &m_star {
        let side_lang = l_aq(&g, a, &cancel.cancelable);
        let base = if pred.requires_nfa_base {
            pred.base_nfa(&side_lang, caps)
        } else {
            pred.base_cfg(&side_lang, caps)
        };
        match base {
            BaseOutcome::Holds(words) => {
                trace.push(note(&m_star, Some(a), "base predicate holds"));
                let mut derivation = None;
                let mut verified = true;
                if left_linear {
                    for w in &words {
                        let pump = find_pump_ll(&g, a, &cancel.cancelable, w);
                        let tree = pump.and_then(|tau| {
                            embed_factor_witness(&g, &m_star, &cancel.flows, &tau, caps.solve_cap)
                        });
                        match tree {
                            Some(t) if t.yield_word().contains(w.as_str()) => {
                                derivation = Some(t);
                            }
                            _ => {
                                verified = false;
                                break;
                            }
                        }
                    }
                }
                if !verified {
                    saw_unknown = true;
                    trace.push(note(&m_star, Some(a), "witness embedding failed"));
                    continue;
                }
                let word = derivation.as_ref().map(|d| d.yield_word());
                return Ok(DecisionReport {
                    outcome: Tri::Yes,
                    witness: Some(DecisionWitness {
                        nonterminals: m_star.clone(),
                        nonterminal: Some(a.clone()),
                        cancelable: cancel.cancelable.clone(),
                        words,
                        derivation,
                        word,
                    }),
                    trace,
                });
            }
            BaseOutcome::Fails(_) => {
                trace.push(note(&m_star, Some(a), "base predicate fails"));
            }
            BaseOutcome::Unknown => {
                trace.push(note(&m_star, Some(a), "base predicate capped out"));
                saw_unknown = true;
            }
        }
    }
    Ok(DecisionReport {
        outcome: if saw_unknown { Tri::Unknown } else { Tri::No },
        witness: None,
        trace,
    })
}

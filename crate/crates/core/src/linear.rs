//! Linear-algebraic core: boundary map, counter effects, flows and their
//! pump decomposition, and a small exact integer feasibility solver used by
//! the decision pipeline.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::models::{DerivationTree, SparseVec, Sym, ZGrammar};

/// Multiset of productions, by id.
pub type ProdVector = BTreeMap<String, u64>;

/// How many tokens of each nonterminal applying the productions produces
/// minus how many it consumes.
pub fn boundary(g: &ZGrammar, v: &ProdVector) -> BTreeMap<String, i64> {
    let mut out: BTreeMap<String, i64> = BTreeMap::new();
    for (id, &count) in v {
        if count == 0 {
            continue;
        }
        let p = g.production(id).expect("unknown production id");
        *out.entry(p.lhs.clone()).or_insert(0) -= count as i64;
        for s in &p.rhs {
            if let Sym::Nt(n) = s {
                *out.entry(n.clone()).or_insert(0) += count as i64;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Total counter effect of a production multiset.
pub fn counter_effect(g: &ZGrammar, v: &ProdVector) -> SparseVec {
    let mut total = SparseVec::new();
    for (id, &count) in v {
        let p = g.production(id).expect("unknown production id");
        total.add_vec(&p.effect.scaled(count as i64));
    }
    total
}

pub fn is_flow(g: &ZGrammar, v: &ProdVector) -> bool {
    boundary(g, v).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowError {
    NotAFlow,
    UnknownProduction(String),
}

/// Splits a flow into pump derivation trees whose production multisets sum
/// back to the flow.
///
/// Every production occurrence starts as a one-level tree; while some tree
/// is not a pump, it is merged with a partner: a tree whose root fills one
/// of its dangling leaves, or failing that a tree with a dangling leaf
/// matching its root. Each merge reduces the tree count, and the boundary
/// balance of a flow guarantees a partner always exists. Merges pick the
/// lowest-index tree and its leftmost matching leaf, so witnesses are
/// reproducible.
pub fn decompose_flow(g: &ZGrammar, f: &ProdVector) -> Result<Vec<DerivationTree>, FlowError> {
    for id in f.keys() {
        if g.production(id).is_none() {
            return Err(FlowError::UnknownProduction(id.clone()));
        }
    }
    if !is_flow(g, f) {
        return Err(FlowError::NotAFlow);
    }
    let mut trees: Vec<DerivationTree> = Vec::new();
    for (id, &count) in f {
        for _ in 0..count {
            trees.push(DerivationTree::of_production(g, id).unwrap());
        }
    }
    loop {
        let Some(i) = trees.iter().position(|t| !t.is_pump()) else {
            return Ok(trees);
        };
        let labels = trees[i].dangling_labels();
        let mut merged = false;
        'graft: for label in &labels {
            for j in 0..trees.len() {
                if j != i && trees[j].root_label() == Some(label.as_str()) {
                    let sub = trees.remove(j);
                    let i = if j < i { i - 1 } else { i };
                    assert!(trees[i].graft(label, sub));
                    merged = true;
                    break 'graft;
                }
            }
        }
        if merged {
            continue;
        }
        let root = trees[i].root_label().unwrap().to_string();
        let Some(j) = trees
            .iter()
            .enumerate()
            .position(|(j, t)| j != i && t.dangling_labels().contains(&root))
        else {
            unreachable!("flow balance guarantees a merge partner");
        };
        let sub = trees.remove(i);
        let j = if i < j { j - 1 } else { j };
        assert!(trees[j].graft(&root, sub));
    }
}

// ---------------------------------------------------------------------------
// Integer feasibility
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct LinearRow {
    pub coeffs: Vec<i64>,
    pub rel: Rel,
    pub rhs: i64,
}

/// A small integer constraint system over named nonnegative variables.
/// `support`, when present, forces all variables outside the set to zero.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub vars: Vec<String>,
    pub rows: Vec<LinearRow>,
    pub lower: Vec<i64>,
    pub support: Option<BTreeSet<usize>>,
}

impl LinearSystem {
    pub fn new(vars: Vec<String>) -> LinearSystem {
        let n = vars.len();
        LinearSystem {
            vars,
            rows: Vec::new(),
            lower: alloc::vec![0; n],
            support: None,
        }
    }

    pub fn push_row(&mut self, coeffs: Vec<i64>, rel: Rel, rhs: i64) {
        assert_eq!(coeffs.len(), self.vars.len());
        self.rows.push(LinearRow { coeffs, rel, rhs });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasResult {
    Solution(ProdVector),
    Infeasible,
    /// The bounded search space was exhausted without an infeasibility
    /// certificate from the exact-rational relaxation.
    Unknown,
}

pub const DEFAULT_SOLVE_CAP: i64 = 64;

fn verify(sys: &LinearSystem, values: &[i64]) -> bool {
    for (i, &v) in values.iter().enumerate() {
        if v < sys.lower[i] {
            return false;
        }
        if let Some(sup) = &sys.support {
            if v != 0 && !sup.contains(&i) {
                return false;
            }
        }
    }
    sys.rows.iter().all(|row| {
        let lhs: i64 = row
            .coeffs
            .iter()
            .zip(values)
            .map(|(c, v)| c * v)
            .sum();
        match row.rel {
            Rel::Eq => lhs == row.rhs,
            Rel::Ge => lhs >= row.rhs,
        }
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact rational feasibility of `rows` under `lower ≤ x` (and `x ≤ upper`
/// where bounded) by a phase-one simplex with Bland's rule. Returns a basic
/// feasible point in the original variable space.
fn simplex_feasible(
    rows: &[LinearRow],
    lower: &[i64],
    upper: &[Option<i64>],
) -> Option<Vec<BigRational>> {
    let n = lower.len();
    let rat = |c: i64| BigRational::from(BigInt::from(c));
    // Shift to y = x − lower ≥ 0 and collect every constraint as a row over
    // y with a slack for the inequalities.
    let mut raw: Vec<(Vec<BigRational>, bool, BigRational)> = Vec::new();
    for row in rows {
        let shift: i64 = row
            .coeffs
            .iter()
            .zip(lower)
            .map(|(c, l)| c * l)
            .sum();
        let coeffs: Vec<BigRational> = row.coeffs.iter().map(|&c| rat(c)).collect();
        raw.push((coeffs, row.rel == Rel::Ge, rat(row.rhs - shift)));
    }
    for (j, u) in upper.iter().enumerate() {
        if let Some(u) = u {
            let mut coeffs = alloc::vec![BigRational::zero(); n];
            coeffs[j] = rat(-1);
            raw.push((coeffs, true, rat(lower[j] - u)));
        }
    }
    let m = raw.len();
    let slacks = raw.iter().filter(|(_, ge, _)| *ge).count();
    let cols = n + slacks + m;
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut cost = alloc::vec![BigRational::zero(); cols + 1];
    let mut basis = alloc::vec![0usize; m];
    let mut slack_ix = 0;
    for (i, (coeffs, ge, b)) in raw.into_iter().enumerate() {
        let mut row = alloc::vec![BigRational::zero(); cols + 1];
        let neg = b.is_negative();
        for (j, c) in coeffs.into_iter().enumerate() {
            row[j] = if neg { -c } else { c };
        }
        if ge {
            let s = if neg { rat(1) } else { rat(-1) };
            row[n + slack_ix] = s;
            slack_ix += 1;
        }
        row[cols] = if neg { -b } else { b };
        let art = n + slacks + i;
        row[art] = rat(1);
        basis[i] = art;
        // Phase-one objective: minimize the artificial column sum; with the
        // artificial basis the reduced cost of column j is −Σᵢ A[i][j].
        for j in 0..=cols {
            if j < n + slacks || j == cols {
                let delta = row[j].clone();
                cost[j] -= delta;
            }
        }
        tab.push(row);
    }
    loop {
        let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let cur = &tab[l][cols] / &tab[l][enter];
                        let cand = &tab[i][cols] / &tab[i][enter];
                        cand < cur || (cand == cur && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            // A negative reduced cost with no blocking row cannot happen in
            // a phase-one objective bounded below by zero.
            break;
        };
        let piv = tab[r][enter].clone();
        for v in tab[r].iter_mut() {
            *v /= &piv;
        }
        for i in 0..m {
            if i != r && !tab[i][enter].is_zero() {
                let f = tab[i][enter].clone();
                for j in 0..=cols {
                    let delta = &f * &tab[r][j];
                    tab[i][j] -= delta;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for j in 0..=cols {
                let delta = &f * &tab[r][j];
                cost[j] -= delta;
            }
        }
        basis[r] = enter;
    }
    if !cost[cols].is_zero() {
        return None;
    }
    let mut x: Vec<BigRational> = lower.iter().map(|&l| rat(l)).collect();
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] += tab[i][cols].clone();
        }
    }
    Some(x)
}

const BRANCH_BUDGET: usize = 500;

/// Exact feasibility: greatest-common-divisor certificates, then a rational
/// relaxation via simplex, then integer search. Homogeneous systems scale
/// the rational point directly; otherwise branch and bound on fractional
/// coordinates, bounded by `cap` per variable. Solutions are re-verified
/// against the raw constraints before being returned.
pub fn solve_feasibility(sys: &LinearSystem, cap: i64) -> FeasResult {
    let n = sys.vars.len();
    let upper: Vec<Option<i64>> = (0..n)
        .map(|i| match &sys.support {
            Some(sup) if !sup.contains(&i) => Some(0),
            _ => None,
        })
        .collect();
    if (0..n).any(|i| upper[i].is_some_and(|u| sys.lower[i] > u)) {
        return FeasResult::Infeasible;
    }
    for row in sys.rows.iter().filter(|r| r.rel == Rel::Eq) {
        let coeffs: Vec<i64> = row
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                // Fold support-forced zeros into the row first.
                if upper[i] == Some(0) && sys.lower[i] == 0 {
                    0
                } else {
                    c
                }
            })
            .collect();
        let g = coeffs.iter().fold(0, |acc, &c| gcd(acc, c));
        if g == 0 {
            if row.rhs != 0 {
                return FeasResult::Infeasible;
            }
        } else if row.rhs % g != 0 {
            return FeasResult::Infeasible;
        }
    }
    let Some(relaxed) = simplex_feasible(&sys.rows, &sys.lower, &upper) else {
        return FeasResult::Infeasible;
    };
    let finish = |values: Vec<i64>| {
        assert!(verify(sys, &values), "solver returned an invalid solution");
        let sol: ProdVector = sys
            .vars
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v != 0)
            .map(|(name, &v)| (name.clone(), v as u64))
            .collect();
        FeasResult::Solution(sol)
    };
    if sys.rows.iter().all(|r| r.rhs == 0) {
        // Homogeneous system: scaling a rational point by a positive integer
        // preserves every constraint, so clear the denominators.
        let scale = relaxed
            .iter()
            .fold(BigInt::from(1), |acc, v| lcm_big(&acc, v.denom()));
        let mut values: Vec<i64> = relaxed
            .iter()
            .map(|v| {
                let scaled = v * BigRational::from(scale.clone());
                i64::try_from(scaled.to_integer()).expect("scaled solution overflows")
            })
            .collect();
        let g = values.iter().fold(0, |acc, &v| gcd(acc, v));
        if g > 1 && values.iter().zip(&sys.lower).all(|(&v, &lo)| v / g >= lo) {
            for v in values.iter_mut() {
                *v /= g;
            }
        }
        return finish(values);
    }
    let mut stack: Vec<(Vec<i64>, Vec<Option<i64>>)> =
        alloc::vec![(sys.lower.clone(), upper)];
    let mut budget = BRANCH_BUDGET;
    let mut capped = false;
    while let Some((lo, up)) = stack.pop() {
        if budget == 0 {
            return FeasResult::Unknown;
        }
        budget -= 1;
        let Some(x) = simplex_feasible(&sys.rows, &lo, &up) else {
            continue;
        };
        match x.iter().position(|v| !v.is_integer()) {
            None => {
                let values: Vec<i64> = x
                    .iter()
                    .map(|v| i64::try_from(v.to_integer()).expect("solution overflows"))
                    .collect();
                return finish(values);
            }
            Some(j) => {
                let fl = x[j].floor().to_integer();
                let fl = i64::try_from(fl).expect("branch point overflows");
                let mut lo_hi = lo.clone();
                lo_hi[j] = fl + 1;
                if lo_hi[j] <= cap {
                    stack.push((lo_hi, up.clone()));
                } else {
                    capped = true;
                }
                let mut up_lo = up;
                up_lo[j] = Some(match up_lo[j] {
                    Some(u) => u.min(fl),
                    None => fl,
                });
                stack.push((lo, up_lo));
            }
        }
    }
    if capped {
        FeasResult::Unknown
    } else {
        FeasResult::Infeasible
    }
}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    let g = gcd_big(a.clone(), b.clone());
    a / &g * b
}

fn gcd_big(mut a: BigInt, mut b: BigInt) -> BigInt {
    while !b.is_zero() {
        let r = &a % &b;
        a = core::mem::replace(&mut b, r);
    }
    a.abs()
}

// ---------------------------------------------------------------------------
// Derivation feasibility with connectivity
// ---------------------------------------------------------------------------

/// Production ids usable inside `M`: left-hand side in `M` and every
/// right-hand-side nonterminal in `M`.
pub fn productions_over(g: &ZGrammar, m: &BTreeSet<String>) -> Vec<String> {
    g.productions
        .iter()
        .filter(|p| {
            m.contains(&p.lhs)
                && p.rhs.iter().all(|s| match s {
                    Sym::Nt(n) => m.contains(n),
                    Sym::T(_) => true,
                })
        })
        .map(|p| p.id.clone())
        .collect()
}

fn support_connected(g: &ZGrammar, support: &[&String], m: &BTreeSet<String>) -> bool {
    let mut reached: BTreeSet<&str> = BTreeSet::new();
    reached.insert(&g.start);
    let mut used = alloc::vec![false; support.len()];
    loop {
        let mut changed = false;
        for (i, id) in support.iter().enumerate() {
            if used[i] {
                continue;
            }
            let p = g.production(id).unwrap();
            if reached.contains(p.lhs.as_str()) {
                used[i] = true;
                changed = true;
                for s in &p.rhs {
                    if let Sym::Nt(n) = s {
                        reached.insert(n);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    used.iter().all(|&u| u) && m.iter().all(|a| reached.contains(a.as_str()))
}

/// Searches for x ∈ ℕ^P with ∂(x) = −e_S, optionally κ(x) = 0, whose
/// support is connected from the start symbol, uses only productions over
/// `M`, and has every nonterminal of `M` as a used left-hand side.
/// Connectivity is handled by enumerating candidate support sets.
pub fn derivation_feasible(
    g: &ZGrammar,
    m: &BTreeSet<String>,
    require_zero_counters: bool,
    cap: i64,
) -> FeasResult {
    if !m.contains(&g.start) {
        return FeasResult::Infeasible;
    }
    let pm = productions_over(g, m);
    if pm.is_empty() {
        return FeasResult::Infeasible;
    }
    let nts: Vec<&String> = m.iter().collect();
    let mut saw_unknown = false;
    // Larger supports are tried first so the richest witness derivations
    // surface before degenerate ones.
    for mask in (1u64..(1 << pm.len())).rev() {
        let support: Vec<&String> = pm
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, id)| id)
            .collect();
        let lhss: BTreeSet<&str> = support
            .iter()
            .map(|id| g.production(id).unwrap().lhs.as_str())
            .collect();
        if !m.iter().all(|a| lhss.contains(a.as_str())) {
            continue;
        }
        if !support_connected(g, &support, m) {
            continue;
        }
        let mut sys = LinearSystem::new(support.iter().map(|s| (*s).clone()).collect());
        sys.lower = alloc::vec![1; support.len()];
        for a in &nts {
            let coeffs: Vec<i64> = support
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
            let rhs = if **a == g.start { -1 } else { 0 };
            sys.push_row(coeffs, Rel::Eq, rhs);
        }
        if require_zero_counters {
            for coord in 0..g.dimension {
                let coeffs: Vec<i64> = support
                    .iter()
                    .map(|id| g.production(id).unwrap().effect.get(coord as u32))
                    .collect();
                sys.push_row(coeffs, Rel::Eq, 0);
            }
        }
        match solve_feasibility(&sys, cap) {
            FeasResult::Solution(sol) => return FeasResult::Solution(sol),
            FeasResult::Infeasible => {}
            FeasResult::Unknown => saw_unknown = true,
        }
    }
    if saw_unknown {
        FeasResult::Unknown
    } else {
        FeasResult::Infeasible
    }
}

/// Like [`derivation_feasible`], but enforces connectivity with cutting
/// planes instead of support enumeration, and requires only the listed
/// nonterminals (plus the start) to be used rather than all of `M`.
///
/// Whenever a candidate solution's support is not reachable from the start
/// symbol, the set `U` of unreached left-hand sides yields a valid cut: any
/// derivation touching `U` must first produce a `U` nonterminal from
/// outside. This keeps the solve polynomial-sized per iteration and scales
/// to grammars whose `P_M` is far too large to enumerate subsets of.
pub fn derivation_feasible_cut(
    g: &ZGrammar,
    m: &BTreeSet<String>,
    must_use: &[String],
    require_zero_counters: bool,
    cap: i64,
) -> FeasResult {
    if !m.contains(&g.start) {
        return FeasResult::Infeasible;
    }
    let pm = productions_over(g, m);
    if pm.is_empty() {
        return FeasResult::Infeasible;
    }
    let mut sys = LinearSystem::new(pm.clone());
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
        let rhs = if *a == g.start { -1 } else { 0 };
        sys.push_row(coeffs, Rel::Eq, rhs);
    }
    if require_zero_counters {
        for coord in 0..g.dimension {
            let coeffs: Vec<i64> = pm
                .iter()
                .map(|id| g.production(id).unwrap().effect.get(coord as u32))
                .collect();
            sys.push_row(coeffs, Rel::Eq, 0);
        }
    }
    for a in must_use {
        let coeffs: Vec<i64> = pm
            .iter()
            .map(|id| (&g.production(id).unwrap().lhs == a) as i64)
            .collect();
        sys.push_row(coeffs, Rel::Ge, 1);
    }
    let big = cap * pm.len() as i64;
    let first = solve_connected(g, &sys, cap, big, &pm, None);
    let FeasResult::Solution(mut best) = first else {
        return first;
    };
    // Shrink the witness: binary search on the total production count, so
    // assembled derivations and their yields stay close to minimal.
    let total = |sol: &ProdVector| sol.values().sum::<u64>() as i64;
    let mut lo = 1;
    let mut hi = total(&best) - 1;
    while lo <= hi {
        let mid = lo + (hi - lo) / 2;
        match solve_connected(g, &sys, cap, big, &pm, Some(mid)) {
            FeasResult::Solution(sol) => {
                hi = total(&sol) - 1;
                best = sol;
            }
            _ => lo = mid + 1,
        }
    }
    FeasResult::Solution(best)
}

fn solve_connected(
    g: &ZGrammar,
    base: &LinearSystem,
    cap: i64,
    big: i64,
    pm: &[String],
    max_total: Option<i64>,
) -> FeasResult {
    let mut sys = base.clone();
    if let Some(t) = max_total {
        sys.push_row(alloc::vec![-1; pm.len()], Rel::Ge, -t);
    }
    let mut cuts_seen: BTreeSet<BTreeSet<String>> = BTreeSet::new();
    loop {
        match solve_feasibility(&sys, cap) {
            FeasResult::Infeasible => return FeasResult::Infeasible,
            FeasResult::Unknown => return FeasResult::Unknown,
            FeasResult::Solution(sol) => {
                let mut reached: BTreeSet<&str> = BTreeSet::new();
                reached.insert(&g.start);
                loop {
                    let mut changed = false;
                    for id in sol.keys() {
                        let p = g.production(id).unwrap();
                        if reached.contains(p.lhs.as_str()) {
                            for s in &p.rhs {
                                if let Sym::Nt(n) = s {
                                    changed |= reached.insert(n);
                                }
                            }
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                let unreached: BTreeSet<String> = sol
                    .keys()
                    .map(|id| g.production(id).unwrap().lhs.clone())
                    .filter(|a| !reached.contains(a.as_str()))
                    .collect();
                if unreached.is_empty() {
                    return FeasResult::Solution(sol);
                }
                if !cuts_seen.insert(unreached.clone()) {
                    return FeasResult::Unknown;
                }
                let coeffs: Vec<i64> = pm
                    .iter()
                    .map(|id| {
                        let p = g.production(id).unwrap();
                        if unreached.contains(&p.lhs) {
                            -1
                        } else if p
                            .rhs
                            .iter()
                            .any(|s| matches!(s, Sym::Nt(n) if unreached.contains(n)))
                        {
                            big
                        } else {
                            0
                        }
                    })
                    .collect();
                sys.push_row(coeffs, Rel::Ge, 0);
            }
        }
    }
}

/// Assembles a production multiset with ∂(x) = −e_S into a complete
/// derivation tree: trees are merged along matching dangling leaves, then
/// leftover pumps are spliced in at an occurrence of their root.
pub fn assemble_derivation(g: &ZGrammar, x: &ProdVector) -> Option<DerivationTree> {
    let mut trees: Vec<DerivationTree> = Vec::new();
    for (id, &count) in x {
        for _ in 0..count {
            trees.push(DerivationTree::of_production(g, id)?);
        }
    }
    if trees.is_empty() {
        return None;
    }
    // Merge phase: fill some tree's dangling leaf with another tree.
    'merge: loop {
        for i in 0..trees.len() {
            for label in trees[i].dangling_labels() {
                for j in 0..trees.len() {
                    if j != i && trees[j].root_label() == Some(label.as_str()) {
                        let sub = trees.remove(j);
                        let i = if j < i { i - 1 } else { i };
                        assert!(trees[i].graft(&label, sub));
                        continue 'merge;
                    }
                }
            }
        }
        break;
    }
    // The main tree derives from the start symbol with nothing dangling;
    // everything else must be a pump to splice back in.
    let main_ix = trees
        .iter()
        .position(|t| t.root_label() == Some(g.start.as_str()) && t.dangling_labels().is_empty())?;
    let mut main = trees.remove(main_ix);
    let mut pumps = trees;
    loop {
        if pumps.is_empty() {
            return Some(main);
        }
        let mut progressed = false;
        let mut rest = Vec::new();
        for pump in pumps {
            if !pump.is_pump() {
                return None;
            }
            let root = pump.root_label().unwrap().to_string();
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
}

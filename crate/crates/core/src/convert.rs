//! Conversions between the machine and grammar kinds.
//!
//! The forward pipeline turns reversal-bounded counter machines into
//! effect-counter models whose acceptance is a plain zero check: counters
//! become ℤ-valued, and counter tests become propositional guards over one
//! globally guessed phase table, which are then compiled away.
//!
//! Phase table encoding: a run is split into 4k segments; for each segment
//! i, counter j and phase ℓ ∈ 1..4 a variable `p_i_j_ℓ` states that counter
//! j is in phase ℓ during segment i (1 = before any increment, 2 =
//! incrementing, 3 = decrementing, 4 = after the last decrement). Instead of
//! one global consistency formula, every counter operation claims its phase
//! with a small conjunction: the positive literal plus negated literals
//! ruling out any earlier segment in a later phase and vice versa. The
//! segment index lives in the state and advances exactly on operations
//! flagged as phase entries, which makes the temporal order of flagged
//! operations follow the segment order.
//!
//! Three auxiliary ℤ-counters per original counter (incremented by the
//! flagged first increment, first decrement and last decrement) are drained
//! by a final chain that forces every counter that left phase 1 to have gone
//! through a complete 2→3→4 cycle. This closes the false-accept gap of
//! nonzero tests guessed into a phase whose flagged entry never happens.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::models::{
    CounterOp, Model, Prbca, Production, PropFormula, Rbca, RbcaTransition, SparseVec, StackOp,
    Sym, ZGrammar, ZPvass, ZTransition, ZVass, ZVassG, ZgTransition, ZpTransition,
};
use crate::normalize::{reduce_reversals_to_one, reduce_reversals_to_one_prbca, NameGen};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConvertError {
    /// The claim encoding needs reversal bound exactly 1.
    NotOneReversal(u32),
}

/// Conversion options; `paper_literal` drops the auxiliary-counter
/// refinement for tests, which is simpler but admits false accepts for
/// nonzero tests (documented as potentially unsound).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConvertOptions {
    pub paper_literal: bool,
}

struct ClaimCtx {
    segs: usize,
}

impl ClaimCtx {
    fn var(&self, seg: usize, j: usize, phase: usize) -> String {
        format!("p_{seg}_{}_{phase}", j + 1)
    }

    /// Literals asserting that counter `j` is in `phase` during `seg`.
    /// An entry claim additionally asserts that the phase starts at `seg`.
    fn claim(&self, seg: usize, j: usize, phase: usize, entry: bool) -> Vec<PropFormula> {
        let mut lits = Vec::new();
        lits.push(PropFormula::lit(&self.var(seg, j, phase), false));
        for l in 1..=4 {
            if l != phase {
                lits.push(PropFormula::lit(&self.var(seg, j, l), true));
            }
        }
        for i in 1..=self.segs {
            for l in 1..=4 {
                let conflict = (i < seg && l > phase) || (i > seg && l < phase);
                if conflict {
                    lits.push(PropFormula::lit(&self.var(i, j, l), true));
                }
            }
            if entry && i < seg {
                lits.push(PropFormula::lit(&self.var(i, j, phase), true));
            }
        }
        lits
    }

    fn never_active(&self, j: usize) -> Vec<PropFormula> {
        let mut lits = Vec::new();
        for i in 1..=self.segs {
            for l in 2..=4 {
                lits.push(PropFormula::lit(&self.var(i, j, l), true));
            }
        }
        lits
    }
}

fn conj(mut lits: Vec<PropFormula>) -> PropFormula {
    lits.sort();
    lits.dedup();
    if lits.len() == 1 {
        lits.pop().unwrap()
    } else {
        PropFormula::And(lits)
    }
}

/// Coordinates of the auxiliary counters for original counter `j`.
fn aux(k: usize, j: usize) -> (u32, u32, u32) {
    let base = (k + 3 * j) as u32;
    (base, base + 1, base + 2)
}

/// Claim-encode a one-reversal machine into a guarded ℤ-counter machine.
pub fn rbca1_to_zvassg(m: &Rbca, opts: &ConvertOptions) -> Result<ZVassG, ConvertError> {
    if m.reversal_bound != 1 {
        return Err(ConvertError::NotOneReversal(m.reversal_bound));
    }
    let k = m.counters;
    let ctx = ClaimCtx { segs: 4 * k.max(1) };
    let refined = !opts.paper_literal;
    let dimension = if refined { 4 * k } else { k };
    let state = |q: &str, seg: usize| format!("{q}~s{seg}");
    let mut transitions: Vec<ZgTransition> = Vec::new();
    let mut states: BTreeSet<String> = BTreeSet::new();
    for q in &m.states {
        for s in 1..=ctx.segs {
            states.insert(state(q, s));
        }
    }
    let tr = |from: String, input: &str, effect: SparseVec, guard: PropFormula, to: String| {
        ZgTransition {
            from,
            input: input.to_string(),
            effect,
            guard,
            to,
        }
    };
    for t in &m.transitions {
        for s in 1..=ctx.segs {
            match t.op {
                CounterOp::Nop => transitions.push(tr(
                    state(&t.from, s),
                    &t.input,
                    SparseVec::new(),
                    PropFormula::tru(),
                    state(&t.to, s),
                )),
                CounterOp::Push(_) | CounterOp::Pop(_) => {
                    unreachable!("stack op in a stackless machine")
                }
                CounterOp::Inc(j) => {
                    let (e2, _, _) = aux(k, j);
                    // First increment: enter phase 2 in a fresh segment.
                    if s + 1 <= ctx.segs {
                        let mut effect = SparseVec::unit(j as u32, 1);
                        if refined {
                            effect.add(e2, 1);
                        }
                        transitions.push(tr(
                            state(&t.from, s),
                            &t.input,
                            effect,
                            conj(ctx.claim(s + 1, j, 2, true)),
                            state(&t.to, s + 1),
                        ));
                    }
                    // Later increment within the current phase-2 segment.
                    transitions.push(tr(
                        state(&t.from, s),
                        &t.input,
                        SparseVec::unit(j as u32, 1),
                        conj(ctx.claim(s, j, 2, false)),
                        state(&t.to, s),
                    ));
                }
                CounterOp::Dec(j) => {
                    let (_, e3, m4) = aux(k, j);
                    // First decrement, not last: enter phase 3.
                    if s + 1 <= ctx.segs {
                        let mut effect = SparseVec::unit(j as u32, -1);
                        if refined {
                            effect.add(e3, 1);
                        }
                        transitions.push(tr(
                            state(&t.from, s),
                            &t.input,
                            effect,
                            conj(ctx.claim(s + 1, j, 3, true)),
                            state(&t.to, s + 1),
                        ));
                    }
                    // Middle decrement within phase 3.
                    transitions.push(tr(
                        state(&t.from, s),
                        &t.input,
                        SparseVec::unit(j as u32, -1),
                        conj(ctx.claim(s, j, 3, false)),
                        state(&t.to, s),
                    ));
                    // Last decrement: leave phase 3, enter phase 4.
                    if s + 1 <= ctx.segs {
                        let mut effect = SparseVec::unit(j as u32, -1);
                        if refined {
                            effect.add(m4, 1);
                        }
                        let mut lits = ctx.claim(s, j, 3, false);
                        lits.extend(ctx.claim(s + 1, j, 4, true));
                        transitions.push(tr(
                            state(&t.from, s),
                            &t.input,
                            effect,
                            conj(lits),
                            state(&t.to, s + 1),
                        ));
                    }
                    // Sole decrement: phases 3 and 4 both entered here.
                    if s + 2 <= ctx.segs {
                        let mut effect = SparseVec::unit(j as u32, -1);
                        if refined {
                            effect.add(e3, 1);
                            effect.add(m4, 1);
                        }
                        let mut lits = ctx.claim(s + 1, j, 3, true);
                        lits.extend(ctx.claim(s + 2, j, 4, true));
                        transitions.push(tr(
                            state(&t.from, s),
                            &t.input,
                            effect,
                            conj(lits),
                            state(&t.to, s + 2),
                        ));
                    }
                }
                CounterOp::Zero(j) => {
                    for phase in [1, 4] {
                        transitions.push(tr(
                            state(&t.from, s),
                            &t.input,
                            SparseVec::new(),
                            conj(ctx.claim(s, j, phase, false)),
                            state(&t.to, s),
                        ));
                    }
                }
                CounterOp::Nz(j) => {
                    for phase in [2, 3] {
                        transitions.push(tr(
                            state(&t.from, s),
                            &t.input,
                            SparseVec::new(),
                            conj(ctx.claim(s, j, phase, false)),
                            state(&t.to, s),
                        ));
                    }
                }
            }
        }
    }
    let mut variables: BTreeSet<String> = BTreeSet::new();
    for i in 1..=ctx.segs {
        for j in 0..k {
            for l in 1..=4 {
                variables.insert(ctx.var(i, j, l));
            }
        }
    }
    let mut names = NameGen::new(states.iter().cloned());
    let finals;
    if refined {
        // End chain: each counter either never became active or completed
        // the full phase cycle, witnessed by its auxiliary counters.
        let mut cur = names.fresh("end0");
        states.insert(cur.clone());
        for f in &m.finals {
            for s in 1..=ctx.segs {
                transitions.push(tr(
                    state(f, s),
                    "",
                    SparseVec::new(),
                    PropFormula::tru(),
                    cur.clone(),
                ));
            }
        }
        for j in 0..k {
            let next = names.fresh(&format!("end{}", j + 1));
            states.insert(next.clone());
            transitions.push(tr(
                cur.clone(),
                "",
                SparseVec::new(),
                conj(ctx.never_active(j)),
                next.clone(),
            ));
            let (e2, e3, m4) = aux(k, j);
            transitions.push(tr(
                cur.clone(),
                "",
                SparseVec::from_entries(alloc::vec![(e2, -1), (e3, -1), (m4, -1)]),
                PropFormula::tru(),
                next.clone(),
            ));
            cur = next;
        }
        finals = [cur].into_iter().collect();
    } else {
        finals = m
            .finals
            .iter()
            .flat_map(|f| (1..=ctx.segs).map(move |s| state(f, s)))
            .collect();
    }
    Ok(ZVassG {
        states,
        alphabet: m.alphabet.clone(),
        dimension,
        variables,
        initial: state(&m.initial, 1),
        finals,
        transitions,
    })
}

/// Literal-only conjunctions collapse to one effect vector; anything else
/// needs a series-parallel subgraph.
fn literal_conjunction(guard: &PropFormula, var_ix: &BTreeMap<String, u32>, d: usize) -> Option<SparseVec> {
    fn collect(
        g: &PropFormula,
        var_ix: &BTreeMap<String, u32>,
        d: usize,
        acc: &mut SparseVec,
    ) -> bool {
        match g {
            PropFormula::Lit { var, neg } => {
                let base = d as u32 + 2 * var_ix[var];
                acc.add(if *neg { base + 1 } else { base }, 1);
                true
            }
            PropFormula::And(parts) => parts.iter().all(|p| collect(p, var_ix, d, acc)),
            PropFormula::Or(_) => false,
        }
    }
    let mut acc = SparseVec::new();
    if collect(guard, var_ix, d, &mut acc) {
        Some(acc)
    } else {
        None
    }
}

/// Compile the guards away: reading a literal bumps a per-polarity counter,
/// and a final drain chain empties exactly one polarity per variable, so
/// zero acceptance forces all reads of a variable to agree.
pub fn zvassg_to_zvass(g: &ZVassG) -> ZVass {
    let d = g.dimension;
    let var_ix: BTreeMap<String, u32> = g
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i as u32))
        .collect();
    let dimension = d + 2 * g.variables.len();
    let mut states = g.states.clone();
    let mut names = NameGen::new(states.iter().cloned());
    let mut transitions: Vec<ZTransition> = Vec::new();
    for t in &g.transitions {
        if let Some(lits) = literal_conjunction(&t.guard, &var_ix, d) {
            transitions.push(ZTransition {
                from: t.from.clone(),
                input: t.input.clone(),
                effect: t.effect.plus(&lits),
                to: t.to.clone(),
            });
            continue;
        }
        // Series-parallel expansion between the source and a junction state
        // that then performs the real step.
        let junction = names.fresh("g");
        states.insert(junction.clone());
        emit_guard(
            &t.guard,
            &t.from,
            &junction,
            &var_ix,
            d,
            &mut names,
            &mut states,
            &mut transitions,
        );
        transitions.push(ZTransition {
            from: junction,
            input: t.input.clone(),
            effect: t.effect.clone(),
            to: t.to.clone(),
        });
    }
    // Drain chain: for every variable zero out one polarity.
    let mut cur = names.fresh("drain0");
    states.insert(cur.clone());
    let mut finals: BTreeSet<String> = BTreeSet::new();
    for f in &g.finals {
        transitions.push(ZTransition {
            from: f.clone(),
            input: String::new(),
            effect: SparseVec::new(),
            to: cur.clone(),
        });
    }
    for (v, vi) in &var_ix {
        let next = names.fresh(&format!("drain_{v}"));
        states.insert(next.clone());
        for polarity in 0..2u32 {
            let side = names.fresh(&format!("drain_{v}_{polarity}"));
            states.insert(side.clone());
            let coord = d as u32 + 2 * vi + polarity;
            transitions.push(ZTransition {
                from: cur.clone(),
                input: String::new(),
                effect: SparseVec::new(),
                to: side.clone(),
            });
            transitions.push(ZTransition {
                from: side.clone(),
                input: String::new(),
                effect: SparseVec::unit(coord, -1),
                to: side.clone(),
            });
            transitions.push(ZTransition {
                from: side,
                input: String::new(),
                effect: SparseVec::new(),
                to: next.clone(),
            });
        }
        cur = next;
    }
    finals.insert(cur);
    ZVass {
        states,
        alphabet: g.alphabet.clone(),
        dimension,
        initial: g.initial.clone(),
        finals,
        transitions,
    }
}

#[allow(clippy::too_many_arguments)]
fn emit_guard(
    guard: &PropFormula,
    from: &str,
    to: &str,
    var_ix: &BTreeMap<String, u32>,
    d: usize,
    names: &mut NameGen,
    states: &mut BTreeSet<String>,
    out: &mut Vec<ZTransition>,
) {
    if let Some(lits) = literal_conjunction(guard, var_ix, d) {
        out.push(ZTransition {
            from: from.to_string(),
            input: String::new(),
            effect: lits,
            to: to.to_string(),
        });
        return;
    }
    match guard {
        PropFormula::Lit { .. } => unreachable!("handled by literal_conjunction"),
        PropFormula::Or(parts) => {
            for p in parts {
                emit_guard(p, from, to, var_ix, d, names, states, out);
            }
        }
        PropFormula::And(parts) => {
            let mut cur = from.to_string();
            for (i, p) in parts.iter().enumerate() {
                let next = if i + 1 == parts.len() {
                    to.to_string()
                } else {
                    let s = names.fresh("g");
                    states.insert(s.clone());
                    s
                };
                emit_guard(p, &cur, &next, var_ix, d, names, states, out);
                cur = next;
            }
        }
    }
}

/// Drop states that cannot lie on an accepting path; cheap and keeps the
/// composed pipeline outputs small.
pub fn trim_zvass(m: &ZVass) -> ZVass {
    let mut fwd: BTreeSet<&String> = BTreeSet::new();
    fwd.insert(&m.initial);
    let mut bwd: BTreeSet<&String> = m.finals.iter().collect();
    loop {
        let mut changed = false;
        for t in &m.transitions {
            if fwd.contains(&t.from) && fwd.insert(&t.to) {
                changed = true;
            }
            if bwd.contains(&t.to) && bwd.insert(&t.from) {
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut keep: BTreeSet<String> = m
        .states
        .iter()
        .filter(|s| fwd.contains(s) && bwd.contains(s))
        .cloned()
        .collect();
    keep.insert(m.initial.clone());
    ZVass {
        states: keep.clone(),
        alphabet: m.alphabet.clone(),
        dimension: m.dimension,
        initial: m.initial.clone(),
        finals: m.finals.intersection(&keep).cloned().collect(),
        transitions: m
            .transitions
            .iter()
            .filter(|t| keep.contains(&t.from) && keep.contains(&t.to))
            .cloned()
            .collect(),
    }
}

fn trim_rbca(m: &Rbca) -> Rbca {
    let mut fwd: BTreeSet<&String> = BTreeSet::new();
    fwd.insert(&m.initial);
    let mut bwd: BTreeSet<&String> = m.finals.iter().collect();
    loop {
        let mut changed = false;
        for t in &m.transitions {
            if fwd.contains(&t.from) && fwd.insert(&t.to) {
                changed = true;
            }
            if bwd.contains(&t.to) && bwd.insert(&t.from) {
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let keep: BTreeSet<String> = m
        .states
        .iter()
        .filter(|s| fwd.contains(s) && bwd.contains(s))
        .cloned()
        .collect();
    if keep.is_empty() {
        // Keep the initial state so the machine stays well-formed.
        let mut states = BTreeSet::new();
        states.insert(m.initial.clone());
        return Rbca {
            states,
            alphabet: m.alphabet.clone(),
            counters: m.counters,
            reversal_bound: m.reversal_bound,
            initial: m.initial.clone(),
            finals: BTreeSet::new(),
            transitions: Vec::new(),
        };
    }
    Rbca {
        states: keep.clone(),
        alphabet: m.alphabet.clone(),
        counters: m.counters,
        reversal_bound: m.reversal_bound,
        initial: m.initial.clone(),
        finals: m.finals.intersection(&keep).cloned().collect(),
        transitions: m
            .transitions
            .iter()
            .filter(|t| keep.contains(&t.from) && keep.contains(&t.to))
            .cloned()
            .collect(),
    }
}

/// Eliminate the counters of a one-reversal machine by tracking phases in
/// the state, like the pushdown pipeline does. Used for reduced machines,
/// whose many counters make the claim encoding too large to simulate.
fn rbca1_to_zvass_phased(m: &Rbca) -> ZVass {
    let zp = prbca1_to_zpvass(&rbca_as_prbca(m));
    ZVass {
        states: zp.states,
        alphabet: zp.alphabet,
        dimension: zp.dimension,
        initial: zp.initial,
        finals: zp.finals,
        transitions: zp
            .transitions
            .into_iter()
            .map(|t| {
                debug_assert!(t.stack.is_none());
                ZTransition {
                    from: t.from,
                    input: t.input,
                    effect: t.effect,
                    to: t.to,
                }
            })
            .collect(),
    }
}

/// Full forward pipeline. One-reversal inputs go through the claim encoding
/// and guard compilation; inputs that need the reversal reduction first are
/// finished with the state-based phase elimination instead, because the
/// claim encoding over the reduced counter set produces machines whose
/// guard counters make membership search intractable.
pub fn rbca_to_zvass(m: &Rbca, opts: &ConvertOptions) -> ZVass {
    let reduced = m.reversal_bound != 1;
    let one = if reduced {
        reduce_reversals_to_one(m)
    } else {
        m.clone()
    };
    let one = trim_rbca(&one);
    if one.finals.is_empty() {
        return ZVass {
            states: [one.initial.clone()].into_iter().collect(),
            alphabet: one.alphabet.clone(),
            dimension: 0,
            initial: one.initial.clone(),
            finals: BTreeSet::new(),
            transitions: Vec::new(),
        };
    }
    if reduced {
        return trim_zvass(&rbca1_to_zvass_phased(&one));
    }
    let guarded = rbca1_to_zvassg(&one, opts).expect("reversal bound is 1 after reduction");
    trim_zvass(&zvassg_to_zvass(&guarded))
}

/// Easy reverse direction: a ℤ-counter becomes a pair of ℕ-counters that a
/// final ε-loop drains in lockstep, so both reach zero iff they were equal.
pub fn zvass_to_rbca(v: &ZVass) -> Rbca {
    let mut names = NameGen::new(v.states.iter().cloned());
    let mut states = v.states.clone();
    let mut transitions: Vec<RbcaTransition> = Vec::new();
    for t in &v.transitions {
        // Expand the effect vector into a chain of unit operations.
        let mut ops: Vec<CounterOp> = Vec::new();
        for (c, val) in t.effect.iter() {
            let counter = if val > 0 { 2 * c } else { 2 * c + 1 } as usize;
            for _ in 0..val.unsigned_abs() {
                ops.push(CounterOp::Inc(counter));
            }
        }
        if ops.is_empty() {
            ops.push(CounterOp::Nop);
        }
        let mut cur = t.from.clone();
        let n = ops.len();
        for (i, op) in ops.into_iter().enumerate() {
            let next = if i + 1 == n {
                t.to.clone()
            } else {
                let s = names.fresh("u");
                states.insert(s.clone());
                s
            };
            transitions.push(RbcaTransition {
                from: cur,
                input: if i == 0 { t.input.clone() } else { String::new() },
                op,
                to: next.clone(),
            });
            cur = next;
        }
    }
    let mut cur = names.fresh("drain");
    states.insert(cur.clone());
    for f in &v.finals {
        transitions.push(RbcaTransition {
            from: f.clone(),
            input: String::new(),
            op: CounterOp::Nop,
            to: cur.clone(),
        });
    }
    for c in 0..v.dimension {
        let next = names.fresh("drain");
        let half = names.fresh("drain");
        states.insert(next.clone());
        states.insert(half.clone());
        transitions.push(RbcaTransition {
            from: cur.clone(),
            input: String::new(),
            op: CounterOp::Dec(2 * c),
            to: half.clone(),
        });
        transitions.push(RbcaTransition {
            from: half,
            input: String::new(),
            op: CounterOp::Dec(2 * c + 1),
            to: cur.clone(),
        });
        transitions.push(RbcaTransition {
            from: cur,
            input: String::new(),
            op: CounterOp::Nop,
            to: next.clone(),
        });
        cur = next;
    }
    let finals: BTreeSet<String> = [cur].into_iter().collect();
    Rbca {
        states,
        alphabet: v.alphabet.clone(),
        counters: 2 * v.dimension,
        reversal_bound: 1,
        initial: v.initial.clone(),
        finals,
        transitions,
    }
}

// ---------------------------------------------------------------------------
// Pushdown pipeline
// ---------------------------------------------------------------------------

/// Eliminate counters of a one-reversal pushdown machine by tracking each
/// counter's phase in the state; effects move to ℤ-vectors checked at the
/// end. Zero tests are allowed in phases 1 and 4, nonzero tests in 2 and 3;
/// decrements nondeterministically mark themselves last (entering phase 4),
/// and final states require every phase in {1, 4}, so a phase-3 nonzero
/// test always has a later decrement.
fn prbca1_to_zpvass(m: &Prbca) -> ZPvass {
    assert_eq!(m.reversal_bound, 1);
    let k = m.counters;
    let name = |q: &str, phases: &[u8]| {
        let mut s = q.to_string();
        s.push('~');
        for p in phases {
            s.push((b'0' + p) as char);
        }
        s
    };
    let initial_phases = alloc::vec![1u8; k];
    let initial = name(&m.initial, &initial_phases);
    let mut states: BTreeSet<String> = BTreeSet::new();
    let mut transitions: Vec<ZpTransition> = Vec::new();
    let mut queue: Vec<(String, Vec<u8>)> = alloc::vec![(m.initial.clone(), initial_phases)];
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(initial.clone());
    states.insert(initial.clone());
    while let Some((q, phases)) = queue.pop() {
        for t in m.transitions.iter().filter(|t| t.from == q) {
            let mut variants: Vec<(Vec<u8>, SparseVec, Option<StackOp>)> = Vec::new();
            match &t.op {
                CounterOp::Nop => variants.push((phases.clone(), SparseVec::new(), None)),
                CounterOp::Push(g) => {
                    variants.push((phases.clone(), SparseVec::new(), Some(StackOp::Push(g.clone()))))
                }
                CounterOp::Pop(g) => {
                    variants.push((phases.clone(), SparseVec::new(), Some(StackOp::Pop(g.clone()))))
                }
                CounterOp::Inc(j) => {
                    if phases[*j] <= 2 {
                        let mut ph = phases.clone();
                        ph[*j] = 2;
                        variants.push((ph, SparseVec::unit(*j as u32, 1), None));
                    }
                }
                CounterOp::Dec(j) => {
                    if (2..=3).contains(&phases[*j]) {
                        for target in [3u8, 4u8] {
                            let mut ph = phases.clone();
                            ph[*j] = target;
                            variants.push((ph, SparseVec::unit(*j as u32, -1), None));
                        }
                    }
                }
                CounterOp::Zero(j) => {
                    if phases[*j] == 1 || phases[*j] == 4 {
                        variants.push((phases.clone(), SparseVec::new(), None));
                    }
                }
                CounterOp::Nz(j) => {
                    if phases[*j] == 2 || phases[*j] == 3 {
                        variants.push((phases.clone(), SparseVec::new(), None));
                    }
                }
            }
            for (ph, effect, stack) in variants {
                let to = name(&t.to, &ph);
                if seen.insert(to.clone()) {
                    states.insert(to.clone());
                    queue.push((t.to.clone(), ph.clone()));
                }
                transitions.push(ZpTransition {
                    from: name(&q, &phases),
                    input: t.input.clone(),
                    effect,
                    stack,
                    to,
                });
            }
        }
    }
    let finals: BTreeSet<String> = states
        .iter()
        .filter(|s| {
            let (q, ph) = s.rsplit_once('~').unwrap();
            m.finals.contains(q) && ph.bytes().all(|b| b == b'1' || b == b'4')
        })
        .cloned()
        .collect();
    ZPvass {
        states,
        alphabet: m.alphabet.clone(),
        dimension: k,
        initial,
        finals,
        transitions,
        stack_alphabet: m.stack_alphabet.clone(),
    }
}

/// Triple construction: nonterminal ⟨p, q⟩ derives the words taking the
/// machine from p with empty stack to q with empty stack; push and pop
/// transitions pair up around a first-return split.
fn zpvass_to_zgrammar(m: &ZPvass) -> ZGrammar {
    let nt = |p: &str, q: &str| format!("X~{p}~{q}");
    let mut productions: Vec<Production> = Vec::new();
    let mut nonterminals: BTreeSet<String> = BTreeSet::new();
    let mut queue: Vec<(String, String)> = Vec::new();
    let need = |p: &str, q: &str,
                    nonterminals: &mut BTreeSet<String>,
                    queue: &mut Vec<(String, String)>| {
        if nonterminals.insert(nt(p, q)) {
            queue.push((p.to_string(), q.to_string()));
        }
    };
    let start = "S".to_string();
    nonterminals.insert(start.clone());
    for f in &m.finals {
        productions.push(Production {
            id: format!("start~{f}"),
            lhs: start.clone(),
            rhs: alloc::vec![Sym::Nt(nt(&m.initial, f))],
            effect: SparseVec::new(),
        });
        need(&m.initial, f, &mut nonterminals, &mut queue);
    }
    let pops: Vec<&ZpTransition> = m
        .transitions
        .iter()
        .filter(|t| matches!(t.stack, Some(StackOp::Pop(_))))
        .collect();
    while let Some((p, q)) = queue.pop() {
        if p == q {
            productions.push(Production {
                id: format!("eps~{p}"),
                lhs: nt(&p, &q),
                rhs: Vec::new(),
                effect: SparseVec::new(),
            });
        }
        for (i, t) in m.transitions.iter().enumerate() {
            if t.from != p {
                continue;
            }
            match &t.stack {
                None => {
                    let mut rhs: Vec<Sym> = t.input.chars().map(Sym::T).collect();
                    rhs.push(Sym::Nt(nt(&t.to, &q)));
                    need(&t.to, &q, &mut nonterminals, &mut queue);
                    productions.push(Production {
                        id: format!("t{i}~{p}~{q}"),
                        lhs: nt(&p, &q),
                        rhs,
                        effect: t.effect.clone(),
                    });
                }
                Some(StackOp::Push(g)) => {
                    for (jj, u) in pops.iter().enumerate() {
                        let Some(StackOp::Pop(h)) = &u.stack else { unreachable!() };
                        if h != g {
                            continue;
                        }
                        let mut rhs: Vec<Sym> = t.input.chars().map(Sym::T).collect();
                        rhs.push(Sym::Nt(nt(&t.to, &u.from)));
                        rhs.extend(u.input.chars().map(Sym::T));
                        rhs.push(Sym::Nt(nt(&u.to, &q)));
                        need(&t.to, &u.from, &mut nonterminals, &mut queue);
                        need(&u.to, &q, &mut nonterminals, &mut queue);
                        productions.push(Production {
                            id: format!("t{i}p{jj}~{p}~{q}"),
                            lhs: nt(&p, &q),
                            rhs,
                            effect: t.effect.plus(&u.effect),
                        });
                    }
                }
                Some(StackOp::Pop(_)) => {}
            }
        }
    }
    ZGrammar {
        nonterminals,
        terminals: m.alphabet.clone(),
        start,
        dimension: m.dimension,
        productions,
    }
    .trimmed()
}

/// Pushdown pipeline: reduce reversals if needed, move counters into state
/// phases with ℤ-effects, then read the grammar off the pushdown.
pub fn prbca_to_zgrammar(m: &Prbca) -> ZGrammar {
    let one = if m.reversal_bound == 1 {
        m.clone()
    } else {
        reduce_reversals_to_one_prbca(m)
    };
    let zp = prbca1_to_zpvass(&one);
    zpvass_to_zgrammar(&zp)
}

fn rbca_as_prbca(m: &Rbca) -> Prbca {
    Prbca {
        states: m.states.clone(),
        alphabet: m.alphabet.clone(),
        counters: m.counters,
        reversal_bound: m.reversal_bound,
        initial: m.initial.clone(),
        finals: m.finals.clone(),
        transitions: m.transitions.clone(),
        stack_alphabet: BTreeSet::new(),
    }
}

/// Converts any model to an equivalent grammar. Counter-only inputs come
/// out left-linear.
pub fn to_zgrammar_model(m: &Model) -> ZGrammar {
    match m {
        Model::Rbca(r) => prbca_to_zgrammar(&rbca_as_prbca(r)),
        Model::Prbca(p) => prbca_to_zgrammar(p),
        Model::ZVass(v) => prbca_to_zgrammar(&rbca_as_prbca(&zvass_to_rbca(v))),
        Model::ZVassG(g) => {
            prbca_to_zgrammar(&rbca_as_prbca(&zvass_to_rbca(&trim_zvass(&zvassg_to_zvass(g)))))
        }
        Model::ZPvass(p) => zpvass_to_zgrammar(p),
        Model::ZGrammar(g) => g.clone(),
    }
}

/// Convenience dispatch used by the CLI.
pub fn to_zvass_model(m: &Model, opts: &ConvertOptions) -> Option<ZVass> {
    match m {
        Model::Rbca(r) => Some(rbca_to_zvass(r, opts)),
        Model::ZVass(v) => Some(v.clone()),
        Model::ZVassG(g) => Some(trim_zvass(&zvassg_to_zvass(g))),
        _ => None,
    }
}

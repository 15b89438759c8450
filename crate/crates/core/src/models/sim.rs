//! Bounded membership and enumeration for the machine kinds.
//!
//! All searches are breadth-first over exact configurations with
//! deduplication. Three refinements keep the searches finite and fast on
//! machines produced by the conversion pipeline without giving up exactness:
//!
//! * hopeless pruning: a configuration is dropped when some counter is
//!   positive (negative) but no reachable transition can ever decrease
//!   (increase) it again;
//! * drain acceleration: a self-loop that only decrements a single counter,
//!   in a region where nothing else touches that counter, is taken either
//!   zero times or often enough to zero the counter;
//! * exclusive-drain pruning: when two counters can only be decreased by
//!   drain loops that no single run can both visit, a configuration with
//!   both counters positive is dead.
//!
//! Each refinement only removes configurations that provably cannot reach an
//! accepting one, so `exact = true` results remain proofs. Searches that hit
//! a resource cap report `Unknown` / `exact = false` instead.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use super::machine::{
    CounterOp, Model, Prbca, PropFormula, Rbca, StackOp, ZPvass, ZVass, ZVassG,
};
use super::vec::SparseVec;
use super::{EnumResult, SimCaps, Tri};

fn letters(s: &str) -> Vec<char> {
    s.chars().collect()
}

// ---------------------------------------------------------------------------
// Counter machines (natural counters, reversal bound, optional stack)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum CmOp {
    Inc(u16),
    Dec(u16),
    Zero(u16),
    Nz(u16),
    Push(u16),
    Pop(u16),
    Nop,
}

struct CmTrans {
    input: Vec<char>,
    op: CmOp,
    to: u32,
}

pub(crate) struct CmView {
    counters: usize,
    reversal_bound: u32,
    initial: u32,
    finals: BTreeSet<u32>,
    out: Vec<Vec<CmTrans>>,
}

impl CmView {
    fn build(
        states: &BTreeSet<String>,
        stack_syms: &BTreeSet<String>,
        counters: usize,
        reversal_bound: u32,
        initial: &str,
        finals: &BTreeSet<String>,
        transitions: &[super::machine::RbcaTransition],
    ) -> CmView {
        let ix: BTreeMap<&str, u32> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let six: BTreeMap<&str, u16> = stack_syms
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u16))
            .collect();
        let mut out: Vec<Vec<CmTrans>> = (0..states.len()).map(|_| Vec::new()).collect();
        for t in transitions {
            let op = match &t.op {
                CounterOp::Inc(i) => CmOp::Inc(*i as u16),
                CounterOp::Dec(i) => CmOp::Dec(*i as u16),
                CounterOp::Zero(i) => CmOp::Zero(*i as u16),
                CounterOp::Nz(i) => CmOp::Nz(*i as u16),
                CounterOp::Push(s) => CmOp::Push(six[s.as_str()]),
                CounterOp::Pop(s) => CmOp::Pop(six[s.as_str()]),
                CounterOp::Nop => CmOp::Nop,
            };
            out[ix[t.from.as_str()] as usize].push(CmTrans {
                input: letters(&t.input),
                op,
                to: ix[t.to.as_str()],
            });
        }
        CmView {
            counters,
            reversal_bound,
            initial: ix[initial],
            finals: finals.iter().map(|f| ix[f.as_str()]).collect(),
            out,
        }
    }

    pub(crate) fn from_rbca(m: &Rbca) -> CmView {
        CmView::build(
            &m.states,
            &BTreeSet::new(),
            m.counters,
            m.reversal_bound,
            &m.initial,
            &m.finals,
            &m.transitions,
        )
    }

    pub(crate) fn from_prbca(m: &Prbca) -> CmView {
        CmView::build(
            &m.states,
            &m.stack_alphabet,
            m.counters,
            m.reversal_bound,
            &m.initial,
            &m.finals,
            &m.transitions,
        )
    }
}

/// Per-counter reversal phase: direction of the last non-test update and the
/// number of switches so far.
type Phase = (i8, u32);

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct CmConfig {
    state: u32,
    pos: usize,
    counters: Vec<i64>,
    phases: Vec<Phase>,
    stack: Vec<u16>,
}

pub(crate) fn accepts_counter(view: &CmView, word: &str, caps: &SimCaps) -> Tri {
    let w = letters(word);
    let start = CmConfig {
        state: view.initial,
        pos: 0,
        counters: alloc::vec![0; view.counters],
        phases: alloc::vec![(0, 0); view.counters],
        stack: Vec::new(),
    };
    let mut visited: BTreeSet<CmConfig> = BTreeSet::new();
    let mut queue: VecDeque<CmConfig> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back(start);
    let mut truncated = false;
    while let Some(c) = queue.pop_front() {
        if c.pos == w.len()
            && view.finals.contains(&c.state)
            && c.counters.iter().all(|&v| v == 0)
            && c.stack.is_empty()
        {
            return Tri::Yes;
        }
        for t in &view.out[c.state as usize] {
            if c.pos + t.input.len() > w.len() || w[c.pos..c.pos + t.input.len()] != t.input[..] {
                continue;
            }
            let mut n = c.clone();
            n.state = t.to;
            n.pos = c.pos + t.input.len();
            let ok = match t.op {
                CmOp::Nop => true,
                CmOp::Inc(i) => {
                    let i = i as usize;
                    let (dir, rev) = n.phases[i];
                    let rev = if dir == -1 { rev + 1 } else { rev };
                    if rev > view.reversal_bound {
                        false
                    } else {
                        n.phases[i] = (1, rev);
                        n.counters[i] += 1;
                        if n.counters[i] > caps.max_counter {
                            truncated = true;
                            false
                        } else {
                            true
                        }
                    }
                }
                CmOp::Dec(i) => {
                    let i = i as usize;
                    if n.counters[i] == 0 {
                        false
                    } else {
                        let (dir, rev) = n.phases[i];
                        let rev = if dir == 1 { rev + 1 } else { rev };
                        if rev > view.reversal_bound {
                            false
                        } else {
                            n.phases[i] = (-1, rev);
                            n.counters[i] -= 1;
                            true
                        }
                    }
                }
                CmOp::Zero(i) => n.counters[i as usize] == 0,
                CmOp::Nz(i) => n.counters[i as usize] != 0,
                CmOp::Push(s) => {
                    if n.stack.len() >= caps.max_stack {
                        truncated = true;
                        false
                    } else {
                        n.stack.push(s);
                        true
                    }
                }
                CmOp::Pop(s) => n.stack.pop() == Some(s),
            };
            if !ok {
                continue;
            }
            if visited.len() >= caps.max_configs {
                truncated = true;
                break;
            }
            if visited.insert(n.clone()) {
                queue.push_back(n);
            }
        }
        if truncated && visited.len() >= caps.max_configs {
            break;
        }
    }
    if truncated {
        Tri::Unknown
    } else {
        Tri::No
    }
}

// ---------------------------------------------------------------------------
// Z-VASS / Z-PVASS
// ---------------------------------------------------------------------------

struct ZvTrans {
    input: Vec<char>,
    effect: SparseVec,
    stack: Option<(bool, u16)>,
    to: u32,
    /// Index into the drain table when this is a drain self-loop.
    drain: Option<usize>,
}

struct Drain {
    coord: u32,
}

pub(crate) struct ZvView {
    initial: u32,
    finals: BTreeSet<u32>,
    out: Vec<Vec<ZvTrans>>,
    /// Coordinates some reachable non-drain transition increases / decreases.
    pos_reach: Bits2,
    neg_reach: Bits2,
    drains: Vec<Drain>,
    /// drain index -> drain indices b such that no run can visit drains of
    /// both coords.
    drain_excl: Vec<Vec<u64>>,
    coord_drain: BTreeMap<u32, usize>,
    /// Per-state bitsets of drains still reachable from the state.
    dreach: Bits2,
    /// Per state and drain at that state: acceleration allowed.
    accel: BTreeMap<(u32, usize), bool>,
    /// Coordinates whose exact magnitude never matters: they are only
    /// increased by ordinary transitions and only decreased by unit-step,
    /// always-accelerated drains, so any positive value behaves like 1 and
    /// configurations can be deduplicated on the clamped value.
    saturable: Vec<bool>,
}

/// Per-state bitsets over coordinates.
pub(crate) struct Bits2 {
    words: usize,
    bits: Vec<u64>,
}

impl Bits2 {
    fn new(states: usize, width: usize) -> Bits2 {
        let words = width.div_ceil(64);
        Bits2 {
            words,
            bits: alloc::vec![0; states * words.max(1)],
        }
    }

    fn get(&self, s: u32, c: u32) -> bool {
        if self.words == 0 {
            return false;
        }
        let w = s as usize * self.words + (c as usize) / 64;
        self.bits[w] >> (c % 64) & 1 == 1
    }

    fn set(&mut self, s: u32, c: u32) {
        let w = s as usize * self.words + (c as usize) / 64;
        self.bits[w] |= 1 << (c % 64);
    }

    fn or_row(&mut self, dst: u32, src: u32) -> bool {
        if self.words == 0 {
            return false;
        }
        let (d, s) = (dst as usize * self.words, src as usize * self.words);
        let mut changed = false;
        for i in 0..self.words {
            let merged = self.bits[d + i] | self.bits[s + i];
            if merged != self.bits[d + i] {
                self.bits[d + i] = merged;
                changed = true;
            }
        }
        changed
    }
}

impl ZvView {
    fn build(
        states: &BTreeSet<String>,
        stack_syms: &BTreeSet<String>,
        dimension: usize,
        initial: &str,
        finals: &BTreeSet<String>,
        transitions: impl Iterator<Item = (String, String, SparseVec, Option<StackOp>, String)>,
    ) -> ZvView {
        let ix: BTreeMap<&str, u32> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let six: BTreeMap<&str, u16> = stack_syms
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u16))
            .collect();
        let n = states.len();
        let mut out: Vec<Vec<ZvTrans>> = (0..n).map(|_| Vec::new()).collect();
        let mut drains: Vec<Drain> = Vec::new();
        let mut coord_drain: BTreeMap<u32, usize> = BTreeMap::new();
        for (from, input, effect, stack, to) in transitions {
            let from = ix[from.as_str()];
            let to = ix[to.as_str()];
            let inp = letters(&input);
            let stack = stack.map(|s| match s {
                StackOp::Push(g) => (true, six[g.as_str()]),
                StackOp::Pop(g) => (false, six[g.as_str()]),
            });
            let mut drain = None;
            if from == to && inp.is_empty() && stack.is_none() && effect.len() == 1 {
                let (coord, step) = effect.iter().next().unwrap();
                if step < 0 {
                    let id = *coord_drain.entry(coord).or_insert_with(|| {
                        drains.push(Drain { coord });
                        drains.len() - 1
                    });
                    drain = Some(id);
                }
            }
            out[from as usize].push(ZvTrans {
                input: inp,
                effect,
                stack,
                to,
                drain,
            });
        }

        // Successor lists and predecessor worklist for the reachability
        // fixpoints.
        let mut preds: Vec<BTreeSet<u32>> = (0..n).map(|_| BTreeSet::new()).collect();
        for (s, ts) in out.iter().enumerate() {
            for t in ts {
                preds[t.to as usize].insert(s as u32);
            }
        }
        let fixpoint = |mut bits: Bits2| -> Bits2 {
            let mut queue: VecDeque<u32> = (0..n as u32).collect();
            let mut queued = alloc::vec![true; n];
            while let Some(s) = queue.pop_front() {
                queued[s as usize] = false;
                let mut changed = false;
                let succs: Vec<u32> = out[s as usize].iter().map(|t| t.to).collect();
                for u in succs {
                    if bits.or_row(s, u) {
                        changed = true;
                    }
                }
                if changed {
                    for &p in &preds[s as usize] {
                        if !queued[p as usize] {
                            queued[p as usize] = true;
                            queue.push_back(p);
                        }
                    }
                }
            }
            bits
        };

        let mut pos0 = Bits2::new(n, dimension);
        let mut neg0 = Bits2::new(n, dimension);
        for (s, ts) in out.iter().enumerate() {
            for t in ts {
                if t.drain.is_some() {
                    continue;
                }
                for (c, v) in t.effect.iter() {
                    if v > 0 {
                        pos0.set(s as u32, c);
                    } else {
                        neg0.set(s as u32, c);
                    }
                }
            }
        }
        let pos_reach = fixpoint(pos0);
        let neg_reach = fixpoint(neg0);

        // Which drains are reachable from each state, as drain-id bitsets.
        let nd = drains.len();
        let mut dr0 = Bits2::new(n, nd);
        for (s, ts) in out.iter().enumerate() {
            for t in ts {
                if let Some(d) = t.drain {
                    dr0.set(s as u32, d as u32);
                }
            }
        }
        let dreach = fixpoint(dr0);

        // reach_from[a] = union of dreach over states carrying drain a.
        let dwords = nd.div_ceil(64).max(1);
        let mut reach_from = alloc::vec![0u64; nd * dwords];
        for (s, ts) in out.iter().enumerate() {
            for t in ts {
                if let Some(d) = t.drain {
                    for w in 0..dreach.words {
                        reach_from[d * dwords + w] |= dreach.bits[s * dreach.words + w];
                    }
                }
            }
        }
        let mut drain_excl: Vec<Vec<u64>> = Vec::with_capacity(nd);
        for a in 0..nd {
            let mut row = alloc::vec![0u64; dwords];
            for (w, slot) in row.iter_mut().enumerate() {
                *slot = !reach_from[a * dwords + w];
            }
            for b in 0..nd {
                if reach_from[b * dwords + a / 64] >> (a % 64) & 1 == 1 {
                    row[b / 64] &= !(1u64 << (b % 64));
                }
            }
            if nd % 64 != 0 {
                row[dwords - 1] &= (1u64 << (nd % 64)) - 1;
            }
            row[a / 64] &= !(1u64 << (a % 64));
            drain_excl.push(row);
        }

        let mut accel: BTreeMap<(u32, usize), bool> = BTreeMap::new();
        for (s, ts) in out.iter().enumerate() {
            for t in ts {
                if let Some(d) = t.drain {
                    let coord = drains[d].coord;
                    let ok = !pos_reach.get(s as u32, coord) && !neg_reach.get(s as u32, coord);
                    accel.insert((s as u32, d), ok);
                }
            }
        }

        let mut saturable = alloc::vec![false; dimension];
        for (&coord, _) in &coord_drain {
            saturable[coord as usize] = true;
        }
        for ts in &out {
            for t in ts {
                match t.drain {
                    Some(d) => {
                        let coord = drains[d].coord;
                        if t.effect.get(coord) != -1 {
                            saturable[coord as usize] = false;
                        }
                    }
                    None => {
                        for (c, v) in t.effect.iter() {
                            if v < 0 && (c as usize) < dimension {
                                saturable[c as usize] = false;
                            }
                        }
                    }
                }
            }
        }
        for (&(_, d), &ok) in &accel {
            if !ok {
                saturable[drains[d].coord as usize] = false;
            }
        }

        ZvView {
            initial: ix[initial],
            finals: finals.iter().map(|f| ix[f.as_str()]).collect(),
            out,
            pos_reach,
            neg_reach,
            drains,
            drain_excl,
            coord_drain,
            dreach,
            accel,
            saturable,
        }
    }

    fn clamp(&self, v: &mut SparseVec) {
        let coords: Vec<u32> = v
            .iter()
            .filter(|&(c, val)| val > 1 && self.saturable.get(c as usize) == Some(&true))
            .map(|(c, _)| c)
            .collect();
        for c in coords {
            v.set(c, 1);
        }
    }

    pub(crate) fn from_zvass(m: &ZVass) -> ZvView {
        ZvView::build(
            &m.states,
            &BTreeSet::new(),
            m.dimension,
            &m.initial,
            &m.finals,
            m.transitions.iter().map(|t| {
                (
                    t.from.clone(),
                    t.input.clone(),
                    t.effect.clone(),
                    None,
                    t.to.clone(),
                )
            }),
        )
    }

    pub(crate) fn from_zpvass(m: &ZPvass) -> ZvView {
        ZvView::build(
            &m.states,
            &m.stack_alphabet,
            m.dimension,
            &m.initial,
            &m.finals,
            m.transitions.iter().map(|t| {
                (
                    t.from.clone(),
                    t.input.clone(),
                    t.effect.clone(),
                    t.stack.clone(),
                    t.to.clone(),
                )
            }),
        )
    }

    /// True when the configuration can no longer cancel some coordinate.
    fn hopeless(&self, state: u32, v: &SparseVec) -> bool {
        for (c, val) in v.iter() {
            if val > 0 {
                if !self.neg_reach.get(state, c) && !self.drain_reachable(state, c) {
                    return true;
                }
            } else if val < 0 && !self.pos_reach.get(state, c) {
                return true;
            }
        }
        false
    }

    fn drain_reachable(&self, state: u32, coord: u32) -> bool {
        match self.coord_drain.get(&coord) {
            Some(&d) => self.dreach.get(state, d as u32),
            None => false,
        }
    }

    /// Exclusive-drain clash: two positive coordinates whose only way down
    /// are drains that no single run can both visit.
    fn drain_clash(&self, state: u32, v: &SparseVec) -> bool {
        if self.drains.is_empty() {
            return false;
        }
        let dwords = self.drains.len().div_ceil(64).max(1);
        let mut positives = alloc::vec![0u64; dwords];
        let mut pos_ids: Vec<usize> = Vec::new();
        for (c, val) in v.iter() {
            if val > 0 && !self.neg_reach.get(state, c) {
                if let Some(&d) = self.coord_drain.get(&c) {
                    positives[d / 64] |= 1 << (d % 64);
                    pos_ids.push(d);
                }
            }
        }
        for &d in &pos_ids {
            for w in 0..dwords {
                if self.drain_excl[d][w] & positives[w] != 0 {
                    return true;
                }
            }
        }
        false
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ZvConfig {
    state: u32,
    pos: usize,
    v: SparseVec,
    stack: Vec<u16>,
}

pub(crate) fn accepts_zvass(view: &ZvView, word: &str, caps: &SimCaps) -> Tri {
    let w = letters(word);
    let start = ZvConfig {
        state: view.initial,
        pos: 0,
        v: SparseVec::new(),
        stack: Vec::new(),
    };
    let mut visited: BTreeSet<ZvConfig> = BTreeSet::new();
    let mut queue: Vec<ZvConfig> = Vec::new();
    visited.insert(start.clone());
    queue.push(start);
    let mut truncated = false;
    'outer: while let Some(c) = queue.pop() {
        if c.pos == w.len()
            && view.finals.contains(&c.state)
            && c.v.is_zero()
            && c.stack.is_empty()
        {
            return Tri::Yes;
        }
        for t in &view.out[c.state as usize] {
            if c.pos + t.input.len() > w.len() || w[c.pos..c.pos + t.input.len()] != t.input[..] {
                continue;
            }
            let mut successors: Vec<ZvConfig> = Vec::new();
            if let Some(d) = t.drain {
                if *view.accel.get(&(c.state, d)).unwrap_or(&false) {
                    // Accelerated: drain fully or not at all. "Not at all" is
                    // simply not taking the loop.
                    let coord = view.drains[d].coord;
                    let step = -t.effect.get(coord);
                    let val = c.v.get(coord);
                    if val > 0 && step > 0 && val % step == 0 {
                        let mut n = c.clone();
                        n.v.set(coord, 0);
                        successors.push(n);
                    }
                } else {
                    let mut n = c.clone();
                    n.v.add_vec(&t.effect);
                    view.clamp(&mut n.v);
                    n.state = t.to;
                    successors.push(n);
                }
            } else {
                let mut n = c.clone();
                n.state = t.to;
                n.pos = c.pos + t.input.len();
                n.v.add_vec(&t.effect);
                view.clamp(&mut n.v);
                match &t.stack {
                    None => {}
                    Some((true, g)) => {
                        if n.stack.len() >= caps.max_stack {
                            truncated = true;
                            continue;
                        }
                        n.stack.push(*g);
                    }
                    Some((false, g)) => {
                        if n.stack.pop() != Some(*g) {
                            continue;
                        }
                    }
                }
                successors.push(n);
            }
            for n in successors {
                if n.v.max_abs() > caps.max_counter {
                    truncated = true;
                    continue;
                }
                if view.hopeless(n.state, &n.v) || view.drain_clash(n.state, &n.v) {
                    continue;
                }
                if visited.len() >= caps.max_configs {
                    truncated = true;
                    break 'outer;
                }
                if visited.insert(n.clone()) {
                    queue.push(n);
                }
            }
        }
    }
    if truncated {
        Tri::Unknown
    } else {
        Tri::No
    }
}

// ---------------------------------------------------------------------------
// Guarded Z-VASS
// ---------------------------------------------------------------------------

/// Extensions of a partial assignment satisfying `guard`. Each returned map
/// extends `base`; the list covers every satisfying total extension.
fn guard_extensions(
    guard: &PropFormula,
    base: &BTreeMap<String, bool>,
) -> Vec<BTreeMap<String, bool>> {
    match guard {
        PropFormula::Lit { var, neg } => match base.get(var) {
            Some(&v) => {
                if v != *neg {
                    alloc::vec![base.clone()]
                } else {
                    Vec::new()
                }
            }
            None => {
                let mut m = base.clone();
                m.insert(var.clone(), !neg);
                alloc::vec![m]
            }
        },
        PropFormula::And(parts) => {
            let mut acc = alloc::vec![base.clone()];
            for p in parts {
                let mut next = Vec::new();
                for a in &acc {
                    next.extend(guard_extensions(p, a));
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            dedup_assignments(acc)
        }
        PropFormula::Or(parts) => {
            let mut acc = Vec::new();
            for p in parts {
                acc.extend(guard_extensions(p, base));
            }
            dedup_assignments(acc)
        }
    }
}

fn dedup_assignments(mut v: Vec<BTreeMap<String, bool>>) -> Vec<BTreeMap<String, bool>> {
    v.sort();
    v.dedup();
    v
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ZgConfig {
    state: u32,
    pos: usize,
    v: SparseVec,
    assign: BTreeMap<String, bool>,
}

pub(crate) fn accepts_zvassg(m: &ZVassG, word: &str, caps: &SimCaps) -> Tri {
    let ix: BTreeMap<&str, u32> = m
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i as u32))
        .collect();
    let mut out: Vec<Vec<(Vec<char>, &SparseVec, &PropFormula, u32)>> =
        (0..m.states.len()).map(|_| Vec::new()).collect();
    for t in &m.transitions {
        out[ix[t.from.as_str()] as usize].push((
            letters(&t.input),
            &t.effect,
            &t.guard,
            ix[t.to.as_str()],
        ));
    }
    let finals: BTreeSet<u32> = m.finals.iter().map(|f| ix[f.as_str()]).collect();
    // Per-state sets of coordinates a future transition can still raise or
    // lower; a configuration that cannot cancel some coordinate is dropped.
    let n = m.states.len();
    let mut preds: Vec<BTreeSet<u32>> = (0..n).map(|_| BTreeSet::new()).collect();
    for (s, ts) in out.iter().enumerate() {
        for &(_, _, _, to) in ts {
            preds[to as usize].insert(s as u32);
        }
    }
    let mut pos_reach = Bits2::new(n, m.dimension);
    let mut neg_reach = Bits2::new(n, m.dimension);
    for (s, ts) in out.iter().enumerate() {
        for (_, effect, _, _) in ts {
            for (c, v) in effect.iter() {
                if v > 0 {
                    pos_reach.set(s as u32, c);
                } else {
                    neg_reach.set(s as u32, c);
                }
            }
        }
    }
    for bits in [&mut pos_reach, &mut neg_reach] {
        let mut queue: VecDeque<u32> = (0..n as u32).collect();
        let mut queued = alloc::vec![true; n];
        while let Some(s) = queue.pop_front() {
            queued[s as usize] = false;
            let mut changed = false;
            let succs: Vec<u32> = out[s as usize].iter().map(|t| t.3).collect();
            for u in succs {
                if bits.or_row(s, u) {
                    changed = true;
                }
            }
            if changed {
                for &p in &preds[s as usize] {
                    if !queued[p as usize] {
                        queued[p as usize] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
    }
    let hopeless = |state: u32, v: &SparseVec| {
        v.iter().any(|(c, val)| {
            (val > 0 && !neg_reach.get(state, c)) || (val < 0 && !pos_reach.get(state, c))
        })
    };
    let w = letters(word);
    let start = ZgConfig {
        state: ix[m.initial.as_str()],
        pos: 0,
        v: SparseVec::new(),
        assign: BTreeMap::new(),
    };
    let mut visited: BTreeSet<ZgConfig> = BTreeSet::new();
    let mut queue: VecDeque<ZgConfig> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back(start);
    let mut truncated = false;
    'outer: while let Some(c) = queue.pop_front() {
        if c.pos == w.len() && finals.contains(&c.state) && c.v.is_zero() {
            return Tri::Yes;
        }
        for (input, effect, guard, to) in &out[c.state as usize] {
            if c.pos + input.len() > w.len() || w[c.pos..c.pos + input.len()] != input[..] {
                continue;
            }
            for assign in guard_extensions(guard, &c.assign) {
                let mut n = c.clone();
                n.state = *to;
                n.pos = c.pos + input.len();
                n.v.add_vec(effect);
                n.assign = assign;
                if hopeless(n.state, &n.v) {
                    continue;
                }
                if n.v.max_abs() > caps.max_counter {
                    truncated = true;
                    continue;
                }
                if visited.len() >= caps.max_configs {
                    truncated = true;
                    break 'outer;
                }
                if visited.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    if truncated {
        Tri::Unknown
    } else {
        Tri::No
    }
}

// ---------------------------------------------------------------------------
// Enumeration with a counter-oblivious prefilter
// ---------------------------------------------------------------------------

struct LetterNfa {
    eps: Vec<Vec<u32>>,
    by_letter: BTreeMap<char, Vec<(u32, u32)>>,
    finals: Vec<bool>,
    can_reach_final: Vec<bool>,
    initial: u32,
}

impl LetterNfa {
    fn build(
        n_states: usize,
        initial: u32,
        finals: &BTreeSet<u32>,
        edges: impl Iterator<Item = (u32, Vec<char>, u32)>,
    ) -> LetterNfa {
        let mut eps: Vec<Vec<u32>> = (0..n_states).map(|_| Vec::new()).collect();
        let mut by_letter: BTreeMap<char, Vec<(u32, u32)>> = BTreeMap::new();
        let mut extra = 0u32;
        let mut pending: Vec<(u32, Vec<char>, u32)> = edges.collect();
        // Split multi-letter inputs through synthetic states.
        let mut split: Vec<(u32, Option<char>, u32)> = Vec::new();
        for (from, input, to) in pending.drain(..) {
            match input.len() {
                0 => split.push((from, None, to)),
                1 => split.push((from, Some(input[0]), to)),
                _ => {
                    let mut cur = from;
                    for (i, &ch) in input.iter().enumerate() {
                        let nxt = if i + 1 == input.len() {
                            to
                        } else {
                            extra += 1;
                            n_states as u32 + extra - 1
                        };
                        split.push((cur, Some(ch), nxt));
                        cur = nxt;
                    }
                }
            }
        }
        let total = n_states + extra as usize;
        eps.resize(total, Vec::new());
        for (from, ch, to) in split {
            match ch {
                None => eps[from as usize].push(to),
                Some(c) => by_letter.entry(c).or_default().push((from, to)),
            }
        }
        let mut fin = alloc::vec![false; total];
        for &f in finals {
            fin[f as usize] = true;
        }
        // Backward reachability to a final over all edges.
        let mut succ: Vec<Vec<u32>> = (0..total).map(|_| Vec::new()).collect();
        for (s, ts) in eps.iter().enumerate() {
            for &t in ts {
                succ[s].push(t);
            }
        }
        for edges in by_letter.values() {
            for &(s, t) in edges {
                succ[s as usize].push(t);
            }
        }
        let mut can = fin.clone();
        loop {
            let mut changed = false;
            for s in 0..total {
                if !can[s] && succ[s].iter().any(|&t| can[t as usize]) {
                    can[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        LetterNfa {
            eps,
            by_letter,
            finals: fin,
            can_reach_final: can,
            initial,
        }
    }

    fn closure(&self, set: &mut BTreeSet<u32>) {
        let mut stack: Vec<u32> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s as usize] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    fn step(&self, set: &BTreeSet<u32>, c: char) -> BTreeSet<u32> {
        let mut next = BTreeSet::new();
        if let Some(edges) = self.by_letter.get(&c) {
            for &(s, t) in edges {
                if set.contains(&s) {
                    next.insert(t);
                }
            }
        }
        self.closure(&mut next);
        next
    }
}

fn model_letter_nfa(model: &Model) -> LetterNfa {
    fn index<'a>(states: &'a BTreeSet<String>) -> BTreeMap<&'a str, u32> {
        states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect()
    }
    match model {
        Model::Rbca(m) => {
            let ix = index(&m.states);
            LetterNfa::build(
                m.states.len(),
                ix[m.initial.as_str()],
                &m.finals.iter().map(|f| ix[f.as_str()]).collect(),
                m.transitions
                    .iter()
                    .map(|t| (ix[t.from.as_str()], letters(&t.input), ix[t.to.as_str()]))
                    .collect::<Vec<_>>()
                    .into_iter(),
            )
        }
        Model::Prbca(m) => {
            let ix = index(&m.states);
            LetterNfa::build(
                m.states.len(),
                ix[m.initial.as_str()],
                &m.finals.iter().map(|f| ix[f.as_str()]).collect(),
                m.transitions
                    .iter()
                    .map(|t| (ix[t.from.as_str()], letters(&t.input), ix[t.to.as_str()]))
                    .collect::<Vec<_>>()
                    .into_iter(),
            )
        }
        Model::ZVass(m) => {
            let ix = index(&m.states);
            LetterNfa::build(
                m.states.len(),
                ix[m.initial.as_str()],
                &m.finals.iter().map(|f| ix[f.as_str()]).collect(),
                m.transitions
                    .iter()
                    .map(|t| (ix[t.from.as_str()], letters(&t.input), ix[t.to.as_str()]))
                    .collect::<Vec<_>>()
                    .into_iter(),
            )
        }
        Model::ZVassG(m) => {
            let ix = index(&m.states);
            LetterNfa::build(
                m.states.len(),
                ix[m.initial.as_str()],
                &m.finals.iter().map(|f| ix[f.as_str()]).collect(),
                m.transitions
                    .iter()
                    .map(|t| (ix[t.from.as_str()], letters(&t.input), ix[t.to.as_str()]))
                    .collect::<Vec<_>>()
                    .into_iter(),
            )
        }
        Model::ZPvass(m) => {
            let ix = index(&m.states);
            LetterNfa::build(
                m.states.len(),
                ix[m.initial.as_str()],
                &m.finals.iter().map(|f| ix[f.as_str()]).collect(),
                m.transitions
                    .iter()
                    .map(|t| (ix[t.from.as_str()], letters(&t.input), ix[t.to.as_str()]))
                    .collect::<Vec<_>>()
                    .into_iter(),
            )
        }
        Model::ZGrammar(_) => unreachable!("grammars are enumerated by closure"),
    }
}

pub(crate) fn enumerate_machine(model: &Model, max_len: usize, caps: &SimCaps) -> EnumResult {
    let nfa = model_letter_nfa(model);
    let alphabet: Vec<char> = model.alphabet().iter().copied().collect();
    let mut start: BTreeSet<u32> = BTreeSet::new();
    start.insert(nfa.initial);
    nfa.closure(&mut start);
    let mut words = BTreeSet::new();
    let mut exact = true;
    let mut stack: Vec<(String, BTreeSet<u32>)> = alloc::vec![(String::new(), start)];
    while let Some((prefix, set)) = stack.pop() {
        if set.is_empty() || !set.iter().any(|&s| nfa.can_reach_final[s as usize]) {
            continue;
        }
        if set.iter().any(|&s| nfa.finals[s as usize]) {
            match super::accepts(model, &prefix, caps) {
                Tri::Yes => {
                    words.insert(prefix.clone());
                }
                Tri::No => {}
                Tri::Unknown => exact = false,
            }
        }
        if prefix.chars().count() < max_len {
            for &c in &alphabet {
                let next = nfa.step(&set, c);
                if next.is_empty() {
                    continue;
                }
                let mut p2 = prefix.clone();
                p2.push(c);
                stack.push((p2, next));
            }
        }
    }
    EnumResult {
        words,
        max_len,
        exact,
    }
}

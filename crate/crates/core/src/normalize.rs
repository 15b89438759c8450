//! Language-preserving normal forms: unary effect digits, one-reversal
//! counters, regular intersection products, and Chomsky normal form.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::models::{
    CounterOp, Prbca, Production, Rbca, RbcaTransition, SparseVec, Sym, ZGrammar, ZTransition,
    ZVass,
};

/// Fresh-name supply that never collides with a reserved set.
pub(crate) struct NameGen {
    used: BTreeSet<String>,
}

impl NameGen {
    pub(crate) fn new(used: impl IntoIterator<Item = String>) -> NameGen {
        NameGen {
            used: used.into_iter().collect(),
        }
    }

    pub(crate) fn fresh(&mut self, base: &str) -> String {
        if self.used.insert(base.to_string()) {
            return base.to_string();
        }
        for i in 1.. {
            let candidate = format!("{base}_{i}");
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
        unreachable!()
    }
}

// ---------------------------------------------------------------------------
// Reversal reduction
// ---------------------------------------------------------------------------

/// Layout of the reduced counters: per original counter, `m` data counters
/// (one per incrementing segment) followed by a block of `2m` phase
/// counters, of which exactly one holds 1 at any time.
struct Layout {
    k: usize,
    m: usize,
    /// Number of usable phases. Equal to 2m for odd reversal bounds; for an
    /// even bound r the last decrementing phase is forbidden, so runs make
    /// at most r = 2m − 2 phase advances.
    phases: usize,
}

impl Layout {
    fn new(k: usize, r: u32) -> Layout {
        if r == 0 {
            // No reversal: only the first incrementing phase is usable.
            return Layout { k, m: 1, phases: 1 };
        }
        let r_odd = if r % 2 == 1 { r } else { r + 1 };
        let m = ((r_odd + 1) / 2) as usize;
        Layout {
            k,
            m,
            phases: if r % 2 == 1 { 2 * m } else { 2 * m - 1 },
        }
    }

    fn data(&self, i: usize, seg: usize) -> usize {
        i * self.m + seg
    }

    fn phase(&self, i: usize, j: usize) -> usize {
        self.k * self.m + i * 2 * self.m + j
    }

    fn total(&self) -> usize {
        self.k * self.m + self.k * 2 * self.m
    }
}

fn reduce_core(
    names: &mut NameGen,
    layout: &Layout,
    initial: &str,
    finals: &BTreeSet<String>,
    transitions: &[RbcaTransition],
) -> (String, BTreeSet<String>, Vec<RbcaTransition>, BTreeSet<String>) {
    let mut out: Vec<RbcaTransition> = Vec::new();
    let mut new_states: BTreeSet<String> = BTreeSet::new();
    let m = layout.m;
    let tr = |from: &str, input: &str, op: CounterOp, to: &str| RbcaTransition {
        from: from.to_string(),
        input: input.to_string(),
        op,
        to: to.to_string(),
    };
    let dead = names.fresh("dead");
    new_states.insert(dead.clone());

    // Prelude: raise every first phase counter to 1, then enter the
    // original initial state.
    let mut cur = names.fresh("init");
    let new_initial = cur.clone();
    new_states.insert(cur.clone());
    if layout.k == 0 {
        out.push(tr(&cur, "", CounterOp::Nop, initial));
    }
    for i in 0..layout.k {
        let next = if i + 1 == layout.k {
            initial.to_string()
        } else {
            let s = names.fresh("init");
            new_states.insert(s.clone());
            s
        };
        out.push(tr(&cur, "", CounterOp::Inc(layout.phase(i, 0)), &next));
        cur = next;
    }

    for t in transitions {
        match t.op {
            CounterOp::Nop | CounterOp::Push(_) | CounterOp::Pop(_) => out.push(t.clone()),
            CounterOp::Zero(i) => {
                // The simulated value is the sum of the data counters, so a
                // zero test checks them all in sequence.
                let mut cur = t.from.clone();
                for seg in 0..m {
                    let next = if seg + 1 == m {
                        t.to.clone()
                    } else {
                        let s = names.fresh("z");
                        new_states.insert(s.clone());
                        s
                    };
                    let input = if seg == 0 { t.input.as_str() } else { "" };
                    out.push(tr(&cur, input, CounterOp::Zero(layout.data(i, seg)), &next));
                    cur = next;
                }
            }
            CounterOp::Nz(i) => {
                // Nonzero sum means some data counter is nonzero; guess which.
                for seg in 0..m {
                    out.push(tr(&t.from, &t.input, CounterOp::Nz(layout.data(i, seg)), &t.to));
                }
            }
            CounterOp::Inc(i) => {
                // Probe the current phase. In an incrementing phase, bump
                // that segment's data counter; in a decrementing phase,
                // advance to the next incrementing phase first. A final
                // decrementing phase admits no increment.
                let probe0 = names.fresh("inc");
                new_states.insert(probe0.clone());
                out.push(tr(&t.from, &t.input, CounterOp::Nop, &probe0));
                let mut probe = probe0;
                for j in 0..2 * m {
                    let next_probe = if j + 1 == 2 * m {
                        dead.clone()
                    } else {
                        let s = names.fresh("inc");
                        new_states.insert(s.clone());
                        s
                    };
                    out.push(tr(&probe, "", CounterOp::Zero(layout.phase(i, j)), &next_probe));
                    if j % 2 == 0 {
                        let a = names.fresh("inc");
                        new_states.insert(a.clone());
                        out.push(tr(&probe, "", CounterOp::Nz(layout.phase(i, j)), &a));
                        out.push(tr(&a, "", CounterOp::Inc(layout.data(i, j / 2)), &t.to));
                    } else if j + 1 < 2 * m {
                        let a = names.fresh("inc");
                        let b = names.fresh("inc");
                        let c = names.fresh("inc");
                        for s in [&a, &b, &c] {
                            new_states.insert(s.clone());
                        }
                        out.push(tr(&probe, "", CounterOp::Nz(layout.phase(i, j)), &a));
                        out.push(tr(&a, "", CounterOp::Dec(layout.phase(i, j)), &b));
                        out.push(tr(&b, "", CounterOp::Inc(layout.phase(i, j + 1)), &c));
                        out.push(tr(&c, "", CounterOp::Inc(layout.data(i, (j + 1) / 2)), &t.to));
                    } else {
                        out.push(tr(&probe, "", CounterOp::Nz(layout.phase(i, j)), &dead));
                    }
                    probe = next_probe;
                }
            }
            CounterOp::Dec(i) => {
                // Probe the phase; an incrementing phase advances to the
                // following decrementing phase. Then take one unit from a
                // nondeterministically chosen earlier segment.
                let probe0 = names.fresh("dec");
                new_states.insert(probe0.clone());
                out.push(tr(&t.from, &t.input, CounterOp::Nop, &probe0));
                let greens: Vec<String> = (0..m)
                    .map(|_| {
                        let s = names.fresh("pick");
                        new_states.insert(s.clone());
                        s
                    })
                    .collect();
                for (seg, green) in greens.iter().enumerate() {
                    out.push(tr(green, "", CounterOp::Dec(layout.data(i, seg)), &t.to));
                    if seg > 0 {
                        out.push(tr(green, "", CounterOp::Nop, &greens[seg - 1]));
                    }
                }
                let mut probe = probe0;
                for j in 0..2 * m {
                    let next_probe = if j + 1 == 2 * m {
                        dead.clone()
                    } else {
                        let s = names.fresh("dec");
                        new_states.insert(s.clone());
                        s
                    };
                    out.push(tr(&probe, "", CounterOp::Zero(layout.phase(i, j)), &next_probe));
                    let seg_limit = if j % 2 == 0 { j / 2 } else { (j - 1) / 2 };
                    if j % 2 == 0 {
                        if j + 1 >= layout.phases {
                            out.push(tr(&probe, "", CounterOp::Nz(layout.phase(i, j)), &dead));
                            probe = next_probe;
                            continue;
                        }
                        let a = names.fresh("dec");
                        let b = names.fresh("dec");
                        for s in [&a, &b] {
                            new_states.insert(s.clone());
                        }
                        out.push(tr(&probe, "", CounterOp::Nz(layout.phase(i, j)), &a));
                        out.push(tr(&a, "", CounterOp::Dec(layout.phase(i, j)), &b));
                        out.push(tr(&b, "", CounterOp::Inc(layout.phase(i, j + 1)), &greens[seg_limit]));
                    } else {
                        out.push(tr(&probe, "", CounterOp::Nz(layout.phase(i, j)), &greens[seg_limit]));
                    }
                    probe = next_probe;
                }
            }
        }
    }

    // Cleanup: every original final hands off to a chain that removes the
    // one live phase counter of each original counter; wrong guesses block
    // on the decrement.
    let mut new_finals: BTreeSet<String> = BTreeSet::new();
    if layout.k == 0 {
        new_finals = finals.clone();
    } else {
        let mut cur = names.fresh("fin");
        new_states.insert(cur.clone());
        for f in finals {
            out.push(tr(f, "", CounterOp::Nop, &cur));
        }
        for i in 0..layout.k {
            let next = names.fresh("fin");
            new_states.insert(next.clone());
            for j in 0..2 * m {
                out.push(tr(&cur, "", CounterOp::Dec(layout.phase(i, j)), &next));
            }
            cur = next;
        }
        new_finals.insert(cur);
    }

    (new_initial, new_finals, out, new_states)
}

/// Rebuild a machine so that every counter makes at most one reversal.
pub fn reduce_reversals_to_one(m: &Rbca) -> Rbca {
    let layout = Layout::new(m.counters, m.reversal_bound);
    let mut names = NameGen::new(m.states.iter().cloned());
    let (initial, finals, transitions, new_states) =
        reduce_core(&mut names, &layout, &m.initial, &m.finals, &m.transitions);
    let mut states = m.states.clone();
    states.extend(new_states);
    Rbca {
        states,
        alphabet: m.alphabet.clone(),
        counters: layout.total(),
        reversal_bound: 1,
        initial,
        finals,
        transitions,
    }
}

/// Reversal reduction for the pushdown kind; stack operations pass through.
pub fn reduce_reversals_to_one_prbca(m: &Prbca) -> Prbca {
    let layout = Layout::new(m.counters, m.reversal_bound);
    let mut names = NameGen::new(m.states.iter().cloned());
    let (initial, finals, transitions, new_states) =
        reduce_core(&mut names, &layout, &m.initial, &m.finals, &m.transitions);
    let mut states = m.states.clone();
    states.extend(new_states);
    Prbca {
        states,
        alphabet: m.alphabet.clone(),
        counters: layout.total(),
        reversal_bound: 1,
        initial,
        finals,
        transitions,
        stack_alphabet: m.stack_alphabet.clone(),
    }
}

// ---------------------------------------------------------------------------
// Binary to unary effect digits
// ---------------------------------------------------------------------------

fn bits_needed(values: impl Iterator<Item = i64>) -> usize {
    let mut n = 1usize;
    for v in values {
        let mut a = v.unsigned_abs();
        let mut b = 0usize;
        while a > 0 {
            a >>= 1;
            b += 1;
        }
        n = n.max(b);
    }
    n
}

fn digit_effect(effect: &SparseVec, n: usize) -> SparseVec {
    let mut entries = Vec::new();
    for (c, v) in effect.iter() {
        let sign = if v < 0 { -1 } else { 1 };
        let mut a = v.unsigned_abs();
        let mut j = 0u32;
        while a > 0 {
            if a & 1 == 1 {
                entries.push((c * n as u32 + j, sign));
            }
            a >>= 1;
            j += 1;
        }
    }
    SparseVec::from_entries(entries)
}

fn carry_effects(dimension: usize, n: usize) -> Vec<SparseVec> {
    let mut out = Vec::new();
    for c in 0..dimension as u32 {
        for j in 0..(n as u32 - 1) {
            let lo = c * n as u32 + j;
            let hi = lo + 1;
            out.push(SparseVec::from_entries(alloc::vec![(lo, -2), (hi, 1)]));
            out.push(SparseVec::from_entries(alloc::vec![(lo, 2), (hi, -1)]));
        }
    }
    out
}

/// Split each counter into binary-digit counters so all effects lie in
/// {−2..2}; carry loops move weight between adjacent digits.
pub fn binarize_zvass(m: &ZVass) -> ZVass {
    let n = bits_needed(m.transitions.iter().flat_map(|t| t.effect.iter().map(|(_, v)| v)));
    let mut transitions: Vec<ZTransition> = m
        .transitions
        .iter()
        .map(|t| ZTransition {
            from: t.from.clone(),
            input: t.input.clone(),
            effect: digit_effect(&t.effect, n),
            to: t.to.clone(),
        })
        .collect();
    for s in &m.states {
        for e in carry_effects(m.dimension, n) {
            transitions.push(ZTransition {
                from: s.clone(),
                input: String::new(),
                effect: e,
                to: s.clone(),
            });
        }
    }
    ZVass {
        states: m.states.clone(),
        alphabet: m.alphabet.clone(),
        dimension: m.dimension * n,
        initial: m.initial.clone(),
        finals: m.finals.clone(),
        transitions,
    }
}

/// Grammar version of [`binarize_zvass`]; carry moves become self
/// productions on every nonterminal.
pub fn binarize_zgrammar(g: &ZGrammar) -> ZGrammar {
    let n = bits_needed(g.productions.iter().flat_map(|p| p.effect.iter().map(|(_, v)| v)));
    let mut productions: Vec<Production> = g
        .productions
        .iter()
        .map(|p| Production {
            id: p.id.clone(),
            lhs: p.lhs.clone(),
            rhs: p.rhs.clone(),
            effect: digit_effect(&p.effect, n),
        })
        .collect();
    for nt in &g.nonterminals {
        for (i, e) in carry_effects(g.dimension, n).into_iter().enumerate() {
            productions.push(Production {
                id: format!("carry_{nt}_{i}"),
                lhs: nt.clone(),
                rhs: alloc::vec![Sym::Nt(nt.clone())],
                effect: e,
            });
        }
    }
    ZGrammar {
        nonterminals: g.nonterminals.clone(),
        terminals: g.terminals.clone(),
        start: g.start.clone(),
        dimension: g.dimension * n,
        productions,
    }
}

// ---------------------------------------------------------------------------
// Regular intersection
// ---------------------------------------------------------------------------

/// Letter-level automaton extracted from a left-linear zero-effect grammar.
pub(crate) struct RegAut {
    pub(crate) n: usize,
    pub(crate) initial: usize,
    pub(crate) finals: Vec<bool>,
    pub(crate) eps: Vec<Vec<usize>>,
    pub(crate) letter: BTreeMap<char, Vec<(usize, usize)>>,
    pub(crate) names: Vec<String>,
}

impl RegAut {
    pub(crate) fn from_left_linear(g: &ZGrammar) -> Result<RegAut, String> {
        if !g.is_left_linear() {
            return Err("grammar is not left-linear".to_string());
        }
        if g.productions.iter().any(|p| !p.effect.is_zero()) {
            return Err("grammar has nonzero effects".to_string());
        }
        let mut names: Vec<String> = g.nonterminals.iter().cloned().collect();
        let index: BTreeMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let initial = index[g.start.as_str()];
        names.push("acc".to_string());
        let acc = names.len() - 1;
        let mut eps: Vec<Vec<usize>> = Vec::new();
        let mut letter: BTreeMap<char, Vec<(usize, usize)>> = BTreeMap::new();
        let mut next_id = names.len();
        let add_state = |names: &mut Vec<String>, next_id: &mut usize| -> usize {
            names.push(format!("t{}", *next_id));
            *next_id += 1;
            names.len() - 1
        };
        let mut pending: Vec<(usize, Option<char>, usize)> = Vec::new();
        for p in &g.productions {
            let mut src = index[p.lhs.as_str()];
            let tgt = match p.rhs.last() {
                Some(Sym::Nt(b)) => index[b.as_str()],
                _ => acc,
            };
            let terminals: Vec<char> = p
                .rhs
                .iter()
                .filter_map(|s| match s {
                    Sym::T(c) => Some(*c),
                    Sym::Nt(_) => None,
                })
                .collect();
            if terminals.is_empty() {
                pending.push((src, None, tgt));
            } else {
                for (i, &c) in terminals.iter().enumerate() {
                    let dst = if i + 1 == terminals.len() {
                        tgt
                    } else {
                        add_state(&mut names, &mut next_id)
                    };
                    pending.push((src, Some(c), dst));
                    src = dst;
                }
            }
        }
        let n = names.len();
        eps.resize(n, Vec::new());
        for (s, c, t) in pending {
            match c {
                None => eps[s].push(t),
                Some(c) => letter.entry(c).or_default().push((s, t)),
            }
        }
        let mut finals = alloc::vec![false; n];
        finals[acc] = true;
        Ok(RegAut {
            n,
            initial,
            finals,
            eps,
            letter,
            names,
        })
    }

    /// Hand-built automaton; edges use `None` for ε.
    pub(crate) fn from_parts(
        names: Vec<String>,
        initial: usize,
        finals: Vec<bool>,
        edges: Vec<(usize, Option<char>, usize)>,
    ) -> RegAut {
        let n = names.len();
        let mut eps: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        let mut letter: BTreeMap<char, Vec<(usize, usize)>> = BTreeMap::new();
        for (s, c, t) in edges {
            match c {
                None => eps[s].push(t),
                Some(c) => letter.entry(c).or_default().push((s, t)),
            }
        }
        RegAut {
            n,
            initial,
            finals,
            eps,
            letter,
            names,
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    /// States reachable from `p` reading `w`, with ε-closure on both ends.
    fn read(&self, p: usize, w: &str) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::new();
        set.insert(p);
        self.closure(&mut set);
        for c in w.chars() {
            let mut next = BTreeSet::new();
            if let Some(edges) = self.letter.get(&c) {
                for &(s, t) in edges {
                    if set.contains(&s) {
                        next.insert(t);
                    }
                }
            }
            self.closure(&mut next);
            set = next;
        }
        set
    }

    fn accepting(&self, p: usize) -> bool {
        let mut set: BTreeSet<usize> = BTreeSet::new();
        set.insert(p);
        self.closure(&mut set);
        set.iter().any(|&s| self.finals[s])
    }
}

fn product_core(
    states: &BTreeSet<String>,
    initial: &str,
    finals: &BTreeSet<String>,
    transitions: &[RbcaTransition],
    aut: &RegAut,
) -> (BTreeSet<String>, String, BTreeSet<String>, Vec<RbcaTransition>) {
    let name = |q: &str, p: usize| format!("{q}~{}", aut.names[p]);
    let mut out_states: BTreeSet<String> = BTreeSet::new();
    for q in states {
        for p in 0..aut.n {
            out_states.insert(name(q, p));
        }
    }
    let mut out_trans = Vec::new();
    for t in transitions {
        for p in 0..aut.n {
            for p2 in aut.read(p, &t.input) {
                out_trans.push(RbcaTransition {
                    from: name(&t.from, p),
                    input: t.input.clone(),
                    op: t.op.clone(),
                    to: name(&t.to, p2),
                });
            }
        }
    }
    let mut out_finals = BTreeSet::new();
    for f in finals {
        for p in 0..aut.n {
            if aut.accepting(p) {
                out_finals.insert(name(f, p));
            }
        }
    }
    (out_states, name(initial, aut.initial), out_finals, out_trans)
}

/// Restrict a machine's language to a regular language, by state product.
pub fn intersect_rbca(m: &Rbca, regular: &ZGrammar) -> Result<Rbca, String> {
    let aut = RegAut::from_left_linear(regular)?;
    let (states, initial, finals, transitions) =
        product_core(&m.states, &m.initial, &m.finals, &m.transitions, &aut);
    Ok(Rbca {
        states,
        alphabet: m.alphabet.clone(),
        counters: m.counters,
        reversal_bound: m.reversal_bound,
        initial,
        finals,
        transitions,
    })
}

/// Pushdown variant of [`intersect_rbca`].
pub fn intersect_prbca(m: &Prbca, regular: &ZGrammar) -> Result<Prbca, String> {
    let aut = RegAut::from_left_linear(regular)?;
    let (states, initial, finals, transitions) =
        product_core(&m.states, &m.initial, &m.finals, &m.transitions, &aut);
    Ok(Prbca {
        states,
        alphabet: m.alphabet.clone(),
        counters: m.counters,
        reversal_bound: m.reversal_bound,
        initial,
        finals,
        transitions,
        stack_alphabet: m.stack_alphabet.clone(),
    })
}

/// Grammar-side product: nonterminals are annotated with automaton state
/// pairs bracketing the derived word.
pub fn intersect_zgrammar(g: &ZGrammar, regular: &ZGrammar) -> Result<ZGrammar, String> {
    let aut = RegAut::from_left_linear(regular)?;
    intersect_zgrammar_aut(g, &aut)
}

pub(crate) fn intersect_zgrammar_aut(g: &ZGrammar, aut: &RegAut) -> Result<ZGrammar, String> {
    let triple = |a: &str, p: usize, q: usize| format!("{a}~{}~{}", aut.names[p], aut.names[q]);
    // Per-letter reachability relations with ε-closure folded in.
    let mut read1: BTreeMap<Option<char>, Vec<BTreeSet<usize>>> = BTreeMap::new();
    let mut letters: BTreeSet<Option<char>> = g.terminals.iter().map(|&c| Some(c)).collect();
    letters.insert(None);
    for c in letters {
        let per: Vec<BTreeSet<usize>> = (0..aut.n)
            .map(|p| match c {
                Some(c) => aut.read(p, &String::from(c)),
                None => aut.read(p, ""),
            })
            .collect();
        read1.insert(c, per);
    }
    let mut productions = Vec::new();
    let mut nonterminals: BTreeSet<String> = BTreeSet::new();
    for p in &g.productions {
        // Enumerate automaton state sequences along the right-hand side.
        let mut chains: Vec<(usize, usize, Vec<Sym>)> =
            (0..aut.n).map(|s| (s, s, Vec::new())).collect();
        for sym in &p.rhs {
            let mut next_chains = Vec::new();
            for (s0, cur, rhs) in chains {
                match sym {
                    Sym::T(c) => {
                        for &nxt in &read1[&Some(*c)][cur] {
                            let mut r = rhs.clone();
                            r.push(Sym::T(*c));
                            next_chains.push((s0, nxt, r));
                        }
                    }
                    Sym::Nt(a) => {
                        for nxt in 0..aut.n {
                            let mut r = rhs.clone();
                            r.push(Sym::Nt(triple(a, cur, nxt)));
                            next_chains.push((s0, nxt, r));
                        }
                    }
                }
            }
            chains = next_chains;
        }
        let mut variants: BTreeMap<String, usize> = BTreeMap::new();
        for (s0, end, rhs) in chains {
            if p.rhs.is_empty() && !read1[&None][s0].contains(&end) {
                continue;
            }
            let lhs = triple(&p.lhs, s0, end);
            nonterminals.insert(lhs.clone());
            for sym in &rhs {
                if let Sym::Nt(n) = sym {
                    nonterminals.insert(n.clone());
                }
            }
            // Several intermediate state sequences can share entry and exit
            // states; number them so production ids stay unique.
            let base = format!("{}~{}~{}", p.id, aut.names[s0], aut.names[end]);
            let v = variants.entry(base.clone()).or_insert(0);
            let id = if *v == 0 { base } else { format!("{base}~v{v}") };
            *v += 1;
            productions.push(Production {
                id,
                lhs,
                rhs,
                effect: p.effect.clone(),
            });
        }
    }
    let mut names = NameGen::new(nonterminals.iter().cloned());
    let start = names.fresh("S0");
    nonterminals.insert(start.clone());
    for q in 0..aut.n {
        if aut.accepting(q) {
            productions.push(Production {
                id: format!("start~{}", aut.names[q]),
                lhs: start.clone(),
                rhs: alloc::vec![Sym::Nt(triple(&g.start, aut.initial, q))],
                effect: SparseVec::new(),
            });
        }
    }
    // ε-producing triples: A~p~q with empty rhs needs p ⇒ε q, handled above;
    // nothing else to patch. Trim the blowup away.
    let out = ZGrammar {
        nonterminals,
        terminals: g.terminals.clone(),
        start,
        dimension: g.dimension,
        productions,
    }
    .trimmed();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Chomsky normal form
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfResult {
    pub grammar: ZGrammar,
    /// Whether the original language contains the empty word (CNF drops it).
    pub epsilon_in_language: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizeError {
    /// The ε-derivation or unit-chain effect sets exceeded the cap, so CNF
    /// effects could not be enumerated exactly.
    EffectSetCapped(String),
}

fn sort_dedup_productions(prods: &mut Vec<Production>) {
    prods.sort_by(|a, b| {
        (&a.lhs, &a.rhs, &a.effect, &a.id).cmp(&(&b.lhs, &b.rhs, &b.effect, &b.id))
    });
    prods.dedup_by(|a, b| a.lhs == b.lhs && a.rhs == b.rhs && a.effect == b.effect);
}

const CNF_EFFECT_SET_CAP: usize = 128;
const CNF_EFFECT_MAG_CAP: i64 = 64;

/// Effects achievable by ε-derivations from each nonterminal.
fn nullable_effects(g: &ZGrammar) -> Result<BTreeMap<String, BTreeSet<SparseVec>>, NormalizeError> {
    let mut sets: BTreeMap<String, BTreeSet<SparseVec>> = g
        .nonterminals
        .iter()
        .map(|n| (n.clone(), BTreeSet::new()))
        .collect();
    loop {
        let mut changed = false;
        for p in &g.productions {
            if p.rhs.iter().any(|s| matches!(s, Sym::T(_))) {
                continue;
            }
            let mut acc: Vec<SparseVec> = alloc::vec![p.effect.clone()];
            let mut ok = true;
            for sym in &p.rhs {
                let Sym::Nt(n) = sym else { unreachable!() };
                let opts = &sets[n];
                if opts.is_empty() {
                    ok = false;
                    break;
                }
                let mut next = Vec::new();
                for a in &acc {
                    for e in opts {
                        next.push(a.plus(e));
                    }
                }
                acc = next;
            }
            if !ok {
                continue;
            }
            let target = sets.get_mut(&p.lhs).unwrap();
            for e in acc {
                if e.max_abs() > CNF_EFFECT_MAG_CAP {
                    return Err(NormalizeError::EffectSetCapped(format!(
                        "ε-derivation effect of {} exceeds ±{CNF_EFFECT_MAG_CAP}",
                        p.lhs
                    )));
                }
                if target.insert(e) {
                    if target.len() > CNF_EFFECT_SET_CAP {
                        return Err(NormalizeError::EffectSetCapped(format!(
                            "more than {CNF_EFFECT_SET_CAP} ε-derivation effects for {}",
                            p.lhs
                        )));
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(sets);
        }
    }
}

/// Convert to Chomsky normal form: productions (A → BC, v) or (A → a, v).
pub fn cnf_zgrammar(g: &ZGrammar) -> Result<CnfResult, NormalizeError> {
    let mut names = NameGen::new(g.nonterminals.iter().cloned());
    let mut productions: Vec<Production> = Vec::new();
    let mut nonterminals = g.nonterminals.clone();
    let start = names.fresh("S0");
    nonterminals.insert(start.clone());
    productions.push(Production {
        id: "cnf_start".to_string(),
        lhs: start.clone(),
        rhs: alloc::vec![Sym::Nt(g.start.clone())],
        effect: SparseVec::new(),
    });

    // TERM: inside long right-hand sides, wrap terminals.
    let mut term_map: BTreeMap<char, String> = BTreeMap::new();
    for p in &g.productions {
        let mut rhs = p.rhs.clone();
        if rhs.len() >= 2 {
            for sym in rhs.iter_mut() {
                if let Sym::T(c) = sym {
                    let nt = term_map.entry(*c).or_insert_with(|| {
                        let n = names.fresh(&format!("T_{c}"));
                        nonterminals.insert(n.clone());
                        n
                    });
                    *sym = Sym::Nt(nt.clone());
                }
            }
        }
        productions.push(Production {
            id: p.id.clone(),
            lhs: p.lhs.clone(),
            rhs,
            effect: p.effect.clone(),
        });
    }
    for (c, nt) in &term_map {
        productions.push(Production {
            id: format!("cnf_term_{c}"),
            lhs: nt.clone(),
            rhs: alloc::vec![Sym::T(*c)],
            effect: SparseVec::new(),
        });
    }

    // BIN: break long right-hand sides; the effect rides on the first link.
    let mut binned: Vec<Production> = Vec::new();
    for p in &productions {
        if p.rhs.len() <= 2 {
            binned.push(p.clone());
            continue;
        }
        let mut rest = p.rhs.clone();
        let first = rest.remove(0);
        let mut lhs = p.lhs.clone();
        let mut effect = p.effect.clone();
        let mut head = first;
        let mut idx = 0usize;
        while rest.len() >= 2 {
            let link = names.fresh(&format!("B_{}_{idx}", p.id));
            nonterminals.insert(link.clone());
            binned.push(Production {
                id: format!("cnf_bin_{}_{idx}", p.id),
                lhs: lhs.clone(),
                rhs: alloc::vec![head.clone(), Sym::Nt(link.clone())],
                effect: core::mem::take(&mut effect),
            });
            lhs = link;
            head = rest.remove(0);
            idx += 1;
        }
        binned.push(Production {
            id: format!("cnf_bin_{}_{idx}", p.id),
            lhs,
            rhs: alloc::vec![head, rest.remove(0)],
            effect,
        });
    }
    let mut g2 = ZGrammar {
        nonterminals: nonterminals.clone(),
        terminals: g.terminals.clone(),
        start: start.clone(),
        dimension: g.dimension,
        productions: binned,
    };

    // DEL: remove ε-productions, folding nullable-branch effects in.
    let nullable = nullable_effects(&g2)?;
    let epsilon_in_language = nullable
        .get(&start)
        .map(|s| s.contains(&SparseVec::new()))
        .unwrap_or(false);
    let mut deleted: Vec<Production> = Vec::new();
    for p in &g2.productions {
        let nt_positions: Vec<usize> = p
            .rhs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Sym::Nt(n) if !nullable[n].is_empty() => Some(i),
                _ => None,
            })
            .collect();
        for mask in 0..(1u32 << nt_positions.len()) {
            let dropped: Vec<usize> = nt_positions
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            let rhs: Vec<Sym> = p
                .rhs
                .iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(i))
                .map(|(_, s)| s.clone())
                .collect();
            if rhs.is_empty() {
                continue;
            }
            let mut effects: Vec<SparseVec> = alloc::vec![p.effect.clone()];
            for &i in &dropped {
                let Sym::Nt(n) = &p.rhs[i] else { unreachable!() };
                let mut next = Vec::new();
                for a in &effects {
                    for e in &nullable[n] {
                        next.push(a.plus(e));
                    }
                }
                effects = next;
            }
            effects.sort();
            effects.dedup();
            for (j, e) in effects.into_iter().enumerate() {
                let id = if dropped.is_empty() && j == 0 {
                    p.id.clone()
                } else {
                    format!("cnf_del_{}_{mask}_{j}", p.id)
                };
                deleted.push(Production {
                    id,
                    lhs: p.lhs.clone(),
                    rhs: rhs.clone(),
                    effect: e,
                });
            }
        }
    }
    sort_dedup_productions(&mut deleted);
    g2.productions = deleted;

    // UNIT: effects achievable along unit chains A ⇒* B.
    let mut unit: BTreeMap<(String, String), BTreeSet<SparseVec>> = BTreeMap::new();
    for n in &nonterminals {
        unit.insert((n.clone(), n.clone()), [SparseVec::new()].into_iter().collect());
    }
    loop {
        let mut changed = false;
        for p in &g2.productions {
            let [Sym::Nt(b)] = &p.rhs[..] else { continue };
            let sources: Vec<(String, SparseVec)> = unit
                .iter()
                .filter(|((_, to), _)| to == &p.lhs)
                .flat_map(|((from, _), effects)| {
                    effects.iter().map(move |e| (from.clone(), e.clone()))
                })
                .collect();
            for (from, e) in sources {
                let total = e.plus(&p.effect);
                if total.max_abs() > CNF_EFFECT_MAG_CAP {
                    return Err(NormalizeError::EffectSetCapped(format!(
                        "unit-chain effect {from} ⇒* {b} exceeds ±{CNF_EFFECT_MAG_CAP}"
                    )));
                }
                let set = unit.entry((from.clone(), b.clone())).or_default();
                if set.insert(total) {
                    if set.len() > CNF_EFFECT_SET_CAP {
                        return Err(NormalizeError::EffectSetCapped(format!(
                            "more than {CNF_EFFECT_SET_CAP} unit-chain effects {from} ⇒* {b}"
                        )));
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut final_prods: Vec<Production> = Vec::new();
    for p in &g2.productions {
        if let [Sym::Nt(_)] = &p.rhs[..] {
            continue;
        }
        for ((from, to), effects) in &unit {
            if to != &p.lhs {
                continue;
            }
            for (j, e) in effects.iter().enumerate() {
                let id = if from == &p.lhs && e.is_zero() {
                    p.id.clone()
                } else {
                    format!("cnf_unit_{}_{from}_{j}", p.id)
                };
                final_prods.push(Production {
                    id,
                    lhs: from.clone(),
                    rhs: p.rhs.clone(),
                    effect: e.plus(&p.effect),
                });
            }
        }
    }
    sort_dedup_productions(&mut final_prods);
    g2.productions = final_prods;
    let grammar = g2.trimmed();
    Ok(CnfResult {
        grammar,
        epsilon_in_language,
    })
}

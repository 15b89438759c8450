//! Structural validation for all model kinds.
//!
//! Checks referential integrity (states, counters, stack symbols, guard
//! variables, nonterminals, effect coordinates) and lints states that cannot
//! occur on any accepting path.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::grammar::{Sym, ZGrammar};
use super::machine::{CounterOp, Model, PropFormula, StackOp};
use super::vec::SparseVec;

/// A validation finding. Errors make a model unusable; lints are advisory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
    pub is_error: bool,
}

impl Diagnostic {
    fn error(location: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            location: location.into(),
            message: message.into(),
            is_error: true,
        }
    }

    fn lint(location: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            location: location.into(),
            message: message.into(),
            is_error: false,
        }
    }
}

struct MachineShape<'a> {
    states: &'a BTreeSet<String>,
    alphabet: &'a BTreeSet<char>,
    initial: &'a String,
    finals: &'a BTreeSet<String>,
    edges: Vec<(&'a String, &'a String, String)>,
    inputs: Vec<(&'a String, String)>,
}

fn check_machine(shape: &MachineShape, out: &mut Vec<Diagnostic>) {
    if !shape.states.contains(shape.initial) {
        out.push(Diagnostic::error(
            "initial",
            format!("initial state `{}` is not declared", shape.initial),
        ));
    }
    for f in shape.finals {
        if !shape.states.contains(f) {
            out.push(Diagnostic::error(
                "finals",
                format!("final state `{f}` is not declared"),
            ));
        }
    }
    for (from, to, loc) in &shape.edges {
        for end in [from, to] {
            if !shape.states.contains(*end) {
                out.push(Diagnostic::error(
                    loc.clone(),
                    format!("state `{end}` is not declared"),
                ));
            }
        }
    }
    for (input, loc) in &shape.inputs {
        for c in input.chars() {
            if !shape.alphabet.contains(&c) {
                out.push(Diagnostic::error(
                    loc.clone(),
                    format!("input letter `{c}` is not in the alphabet"),
                ));
            }
        }
    }
    // Dead-state lint: forward reachability from the initial state and
    // backward reachability from the finals over the transition graph.
    let mut fwd: BTreeSet<&String> = BTreeSet::new();
    fwd.insert(shape.initial);
    let mut bwd: BTreeSet<&String> = shape.finals.iter().collect();
    loop {
        let mut changed = false;
        for (from, to, _) in &shape.edges {
            if fwd.contains(*from) && fwd.insert(*to) {
                changed = true;
            }
            if bwd.contains(*to) && bwd.insert(*from) {
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for s in shape.states {
        if !fwd.contains(s) || !bwd.contains(s) {
            out.push(Diagnostic::lint(
                format!("state {s}"),
                "state cannot occur on an accepting path",
            ));
        }
    }
}

fn check_counter_op(
    op: &CounterOp,
    counters: usize,
    stack: Option<&BTreeSet<String>>,
    loc: &str,
    out: &mut Vec<Diagnostic>,
) {
    if let Some(i) = op.counter() {
        if i >= counters {
            out.push(Diagnostic::error(
                loc.to_string(),
                format!("counter index {} out of range (machine has {counters})", i + 1),
            ));
        }
    }
    match op {
        CounterOp::Push(g) | CounterOp::Pop(g) => match stack {
            None => out.push(Diagnostic::error(
                loc.to_string(),
                "stack operation on a machine without a stack",
            )),
            Some(syms) => {
                if !syms.contains(g) {
                    out.push(Diagnostic::error(
                        loc.to_string(),
                        format!("stack symbol `{g}` is not declared"),
                    ));
                }
            }
        },
        _ => {}
    }
}

fn check_effect(effect: &SparseVec, dimension: usize, loc: &str, out: &mut Vec<Diagnostic>) {
    if let Some(c) = effect.max_coord() {
        if c as usize >= dimension {
            out.push(Diagnostic::error(
                loc.to_string(),
                format!("effect coordinate {} out of range (dimension {dimension})", c + 1),
            ));
        }
    }
}

fn check_guard(
    guard: &PropFormula,
    vars: &BTreeSet<String>,
    loc: &str,
    out: &mut Vec<Diagnostic>,
) {
    let mut used = BTreeSet::new();
    guard.variables(&mut used);
    for v in used {
        if !vars.contains(&v) {
            out.push(Diagnostic::error(
                loc.to_string(),
                format!("guard variable `{v}` is not declared"),
            ));
        }
    }
}

fn check_grammar(g: &ZGrammar, out: &mut Vec<Diagnostic>) {
    if !g.nonterminals.contains(&g.start) {
        out.push(Diagnostic::error(
            "start",
            format!("start symbol `{}` is not declared", g.start),
        ));
    }
    let mut ids: BTreeMap<&String, usize> = BTreeMap::new();
    for p in &g.productions {
        let loc = format!("production {}", p.id);
        *ids.entry(&p.id).or_insert(0) += 1;
        if !g.nonterminals.contains(&p.lhs) {
            out.push(Diagnostic::error(
                loc.clone(),
                format!("left-hand side `{}` is not declared", p.lhs),
            ));
        }
        for sym in &p.rhs {
            match sym {
                Sym::Nt(n) => {
                    if !g.nonterminals.contains(n) {
                        out.push(Diagnostic::error(
                            loc.clone(),
                            format!("nonterminal `{n}` is not declared"),
                        ));
                    }
                }
                Sym::T(c) => {
                    if !g.terminals.contains(c) {
                        out.push(Diagnostic::error(
                            loc.clone(),
                            format!("terminal `{c}` is not declared"),
                        ));
                    }
                }
            }
        }
        check_effect(&p.effect, g.dimension.max(1), &loc, out);
        if g.dimension == 0 && !p.effect.is_zero() {
            out.push(Diagnostic::error(
                loc.clone(),
                "nonzero effect in a zero-dimensional grammar",
            ));
        }
    }
    for (id, count) in ids {
        if count > 1 {
            out.push(Diagnostic::error(
                format!("production {id}"),
                "duplicate production id",
            ));
        }
    }
    let useful: BTreeSet<String> = g.trimmed().nonterminals;
    for n in &g.nonterminals {
        if !useful.contains(n) {
            out.push(Diagnostic::lint(
                format!("nonterminal {n}"),
                "nonterminal cannot occur in a complete derivation from the start symbol",
            ));
        }
    }
}

pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    match model {
        Model::Rbca(m) => {
            let edges = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.from, &t.to, format!("transition {i}")))
                .collect();
            let inputs = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.input, format!("transition {i}")))
                .collect();
            check_machine(
                &MachineShape {
                    states: &m.states,
                    alphabet: &m.alphabet,
                    initial: &m.initial,
                    finals: &m.finals,
                    edges,
                    inputs,
                },
                &mut out,
            );
            for (i, t) in m.transitions.iter().enumerate() {
                check_counter_op(&t.op, m.counters, None, &format!("transition {i}"), &mut out);
            }
        }
        Model::Prbca(m) => {
            let edges = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.from, &t.to, format!("transition {i}")))
                .collect();
            let inputs = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.input, format!("transition {i}")))
                .collect();
            check_machine(
                &MachineShape {
                    states: &m.states,
                    alphabet: &m.alphabet,
                    initial: &m.initial,
                    finals: &m.finals,
                    edges,
                    inputs,
                },
                &mut out,
            );
            for (i, t) in m.transitions.iter().enumerate() {
                check_counter_op(
                    &t.op,
                    m.counters,
                    Some(&m.stack_alphabet),
                    &format!("transition {i}"),
                    &mut out,
                );
            }
        }
        Model::ZVass(m) => {
            let edges = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.from, &t.to, format!("transition {i}")))
                .collect();
            let inputs = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.input, format!("transition {i}")))
                .collect();
            check_machine(
                &MachineShape {
                    states: &m.states,
                    alphabet: &m.alphabet,
                    initial: &m.initial,
                    finals: &m.finals,
                    edges,
                    inputs,
                },
                &mut out,
            );
            for (i, t) in m.transitions.iter().enumerate() {
                check_effect(&t.effect, m.dimension, &format!("transition {i}"), &mut out);
            }
        }
        Model::ZVassG(m) => {
            let edges = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.from, &t.to, format!("transition {i}")))
                .collect();
            let inputs = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.input, format!("transition {i}")))
                .collect();
            check_machine(
                &MachineShape {
                    states: &m.states,
                    alphabet: &m.alphabet,
                    initial: &m.initial,
                    finals: &m.finals,
                    edges,
                    inputs,
                },
                &mut out,
            );
            for (i, t) in m.transitions.iter().enumerate() {
                let loc = format!("transition {i}");
                check_effect(&t.effect, m.dimension, &loc, &mut out);
                check_guard(&t.guard, &m.variables, &loc, &mut out);
            }
        }
        Model::ZPvass(m) => {
            let edges = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.from, &t.to, format!("transition {i}")))
                .collect();
            let inputs = m
                .transitions
                .iter()
                .enumerate()
                .map(|(i, t)| (&t.input, format!("transition {i}")))
                .collect();
            check_machine(
                &MachineShape {
                    states: &m.states,
                    alphabet: &m.alphabet,
                    initial: &m.initial,
                    finals: &m.finals,
                    edges,
                    inputs,
                },
                &mut out,
            );
            for (i, t) in m.transitions.iter().enumerate() {
                let loc = format!("transition {i}");
                check_effect(&t.effect, m.dimension, &loc, &mut out);
                if let Some(StackOp::Push(g)) | Some(StackOp::Pop(g)) = &t.stack {
                    if !m.stack_alphabet.contains(g) {
                        out.push(Diagnostic::error(
                            loc,
                            format!("stack symbol `{g}` is not declared"),
                        ));
                    }
                }
            }
        }
        Model::ZGrammar(g) => check_grammar(g, &mut out),
    }
    out
}

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::vec::SparseVec;

/// A single counter or stack operation of a (pushdown) counter automaton.
///
/// Counters are indexed from zero. `Zero` and `Nz` are tests and leave the
/// counter untouched; they do not affect the reversal phase of a counter.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CounterOp {
    Inc(usize),
    Dec(usize),
    Zero(usize),
    Nz(usize),
    Push(String),
    Pop(String),
    Nop,
}

impl CounterOp {
    pub fn counter(&self) -> Option<usize> {
        match *self {
            CounterOp::Inc(i) | CounterOp::Dec(i) | CounterOp::Zero(i) | CounterOp::Nz(i) => {
                Some(i)
            }
            _ => None,
        }
    }

    pub fn is_stack(&self) -> bool {
        matches!(self, CounterOp::Push(_) | CounterOp::Pop(_))
    }
}

/// Transition of a (pushdown) counter automaton: read `input` (a possibly
/// empty word), perform one operation, move on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RbcaTransition {
    pub from: String,
    pub input: String,
    pub op: CounterOp,
    pub to: String,
}

/// Reversal-bounded counter automaton with natural-number counters.
///
/// Acceptance: final state, all counters zero, and the run switches between
/// incrementing and decrementing each counter at most `reversal_bound` times.
/// The reversal bound is imposed on runs from the outside; it is not part of
/// the transition structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rbca {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<char>,
    pub counters: usize,
    pub reversal_bound: u32,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: Vec<RbcaTransition>,
}

/// Pushdown reversal-bounded counter automaton.
///
/// Acceptance additionally requires an empty stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prbca {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<char>,
    pub stack_alphabet: BTreeSet<String>,
    pub counters: usize,
    pub reversal_bound: u32,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: Vec<RbcaTransition>,
}

/// Transition of a Z-VASS: read `input`, add `effect` to the counter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZTransition {
    pub from: String,
    pub input: String,
    pub effect: SparseVec,
    pub to: String,
}

/// Integer vector addition system with states.
///
/// Counters range over all integers and are update-only; acceptance requires
/// a final state with the zero vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZVass {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<char>,
    pub dimension: usize,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: Vec<ZTransition>,
}

/// Propositional formula over named boolean variables, in negation normal
/// form: negation only occurs on literals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PropFormula {
    Lit { var: String, neg: bool },
    And(Vec<PropFormula>),
    Or(Vec<PropFormula>),
}

impl PropFormula {
    pub fn tru() -> Self {
        PropFormula::And(Vec::new())
    }

    pub fn lit(var: impl Into<String>, neg: bool) -> Self {
        PropFormula::Lit {
            var: var.into(),
            neg,
        }
    }

    pub fn and(parts: Vec<PropFormula>) -> Self {
        PropFormula::And(parts)
    }

    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            PropFormula::Lit { var, .. } => {
                out.insert(var.clone());
            }
            PropFormula::And(parts) | PropFormula::Or(parts) => {
                for p in parts {
                    p.variables(out);
                }
            }
        }
    }

    /// Evaluates under a total assignment; unassigned variables default to
    /// false.
    pub fn eval(&self, assignment: &alloc::collections::BTreeMap<String, bool>) -> bool {
        match self {
            PropFormula::Lit { var, neg } => {
                let v = assignment.get(var).copied().unwrap_or(false);
                v != *neg
            }
            PropFormula::And(parts) => parts.iter().all(|p| p.eval(assignment)),
            PropFormula::Or(parts) => parts.iter().any(|p| p.eval(assignment)),
        }
    }
}

/// Guarded Z-VASS transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZgTransition {
    pub from: String,
    pub input: String,
    pub effect: SparseVec,
    pub guard: PropFormula,
    pub to: String,
}

/// Z-VASS with propositional guards over a globally guessed boolean
/// assignment: a word is accepted if some assignment admits an accepting run
/// whose guards all evaluate to true under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZVassG {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<char>,
    pub variables: BTreeSet<String>,
    pub dimension: usize,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: Vec<ZgTransition>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StackOp {
    Push(String),
    Pop(String),
}

/// Pushdown Z-VASS transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpTransition {
    pub from: String,
    pub input: String,
    pub effect: SparseVec,
    pub stack: Option<StackOp>,
    pub to: String,
}

/// Pushdown Z-VASS; acceptance requires final state, empty stack and the
/// zero vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZPvass {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<char>,
    pub stack_alphabet: BTreeSet<String>,
    pub dimension: usize,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub transitions: Vec<ZpTransition>,
}

/// Any supported machine or grammar kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Rbca(Rbca),
    Prbca(Prbca),
    ZVass(ZVass),
    ZVassG(ZVassG),
    ZPvass(ZPvass),
    ZGrammar(super::grammar::ZGrammar),
}

impl Model {
    pub fn alphabet(&self) -> &BTreeSet<char> {
        match self {
            Model::Rbca(m) => &m.alphabet,
            Model::Prbca(m) => &m.alphabet,
            Model::ZVass(m) => &m.alphabet,
            Model::ZVassG(m) => &m.alphabet,
            Model::ZPvass(m) => &m.alphabet,
            Model::ZGrammar(g) => &g.terminals,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::Rbca(_) => "rbca",
            Model::Prbca(_) => "prbca",
            Model::ZVass(_) => "zvass",
            Model::ZVassG(_) => "zvassg",
            Model::ZPvass(_) => "zpvass",
            Model::ZGrammar(_) => "zgrammar",
        }
    }
}

//! JSON file format for machines and grammars. Counters are 1-based in
//! files and 0-based in memory; effect vectors are dense arrays.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use rbca_core::models::{
    CounterOp, Model, Prbca, Production, PropFormula, Rbca, RbcaTransition, SparseVec, StackOp,
    Sym, ZGrammar, ZPvass, ZTransition, ZVass, ZVassG, ZgTransition, ZpTransition,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum OpFile {
    Inc { counter: usize },
    Dec { counter: usize },
    Zero { counter: usize },
    Nz { counter: usize },
    Push { symbol: String },
    Pop { symbol: String },
    Nop,
}

impl OpFile {
    fn from_op(op: &CounterOp) -> OpFile {
        match op {
            CounterOp::Inc(i) => OpFile::Inc { counter: i + 1 },
            CounterOp::Dec(i) => OpFile::Dec { counter: i + 1 },
            CounterOp::Zero(i) => OpFile::Zero { counter: i + 1 },
            CounterOp::Nz(i) => OpFile::Nz { counter: i + 1 },
            CounterOp::Push(s) => OpFile::Push { symbol: s.clone() },
            CounterOp::Pop(s) => OpFile::Pop { symbol: s.clone() },
            CounterOp::Nop => OpFile::Nop,
        }
    }

    fn into_op(self) -> Result<CounterOp, String> {
        let shift = |c: usize| {
            c.checked_sub(1)
                .ok_or_else(|| "counters are 1-based".to_string())
        };
        Ok(match self {
            OpFile::Inc { counter } => CounterOp::Inc(shift(counter)?),
            OpFile::Dec { counter } => CounterOp::Dec(shift(counter)?),
            OpFile::Zero { counter } => CounterOp::Zero(shift(counter)?),
            OpFile::Nz { counter } => CounterOp::Nz(shift(counter)?),
            OpFile::Push { symbol } => CounterOp::Push(symbol),
            OpFile::Pop { symbol } => CounterOp::Pop(symbol),
            OpFile::Nop => CounterOp::Nop,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum GuardFile {
    Lit { var: String, neg: bool },
    And { parts: Vec<GuardFile> },
    Or { parts: Vec<GuardFile> },
}

impl GuardFile {
    fn from_formula(f: &PropFormula) -> GuardFile {
        match f {
            PropFormula::Lit { var, neg } => GuardFile::Lit {
                var: var.clone(),
                neg: *neg,
            },
            PropFormula::And(parts) => GuardFile::And {
                parts: parts.iter().map(GuardFile::from_formula).collect(),
            },
            PropFormula::Or(parts) => GuardFile::Or {
                parts: parts.iter().map(GuardFile::from_formula).collect(),
            },
        }
    }

    fn into_formula(self) -> PropFormula {
        match self {
            GuardFile::Lit { var, neg } => PropFormula::Lit { var, neg },
            GuardFile::And { parts } => {
                PropFormula::And(parts.into_iter().map(GuardFile::into_formula).collect())
            }
            GuardFile::Or { parts } => {
                PropFormula::Or(parts.into_iter().map(GuardFile::into_formula).collect())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpTransitionFile {
    from: String,
    input: String,
    op: OpFile,
    to: String,
}

impl OpTransitionFile {
    fn from_transition(t: &RbcaTransition) -> OpTransitionFile {
        OpTransitionFile {
            from: t.from.clone(),
            input: t.input.clone(),
            op: OpFile::from_op(&t.op),
            to: t.to.clone(),
        }
    }

    fn into_transition(self) -> Result<RbcaTransition, String> {
        Ok(RbcaTransition {
            from: self.from,
            input: self.input,
            op: self.op.into_op()?,
            to: self.to,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EffTransitionFile {
    from: String,
    input: String,
    effect: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<GuardFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stack: Option<StackFile>,
    to: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum StackFile {
    Push { symbol: String },
    Pop { symbol: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    kind: String,
    version: u32,
    states: Vec<String>,
    alphabet: Vec<char>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stack_alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reversal_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variables: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    initial: String,
    finals: Vec<String>,
    transitions: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductionFile {
    id: String,
    lhs: String,
    rhs: Vec<String>,
    #[serde(default)]
    effect: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarFile {
    kind: String,
    version: u32,
    nonterminals: Vec<String>,
    terminals: Vec<char>,
    start: String,
    #[serde(default)]
    dimension: usize,
    productions: Vec<ProductionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

fn dense(effect: &SparseVec, dim: usize) -> Vec<i64> {
    effect.to_dense(dim)
}

fn parse_transitions<T: serde::de::DeserializeOwned>(
    raw: Vec<serde_json::Value>,
) -> Result<Vec<T>, String> {
    raw.into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| format!("transition: {e}")))
        .collect()
}

fn machine_header(m: &Model) -> MachineFile {
    let (states, alphabet, initial, finals) = match m {
        Model::Rbca(m) => (&m.states, &m.alphabet, &m.initial, &m.finals),
        Model::Prbca(m) => (&m.states, &m.alphabet, &m.initial, &m.finals),
        Model::ZVass(m) => (&m.states, &m.alphabet, &m.initial, &m.finals),
        Model::ZVassG(m) => (&m.states, &m.alphabet, &m.initial, &m.finals),
        Model::ZPvass(m) => (&m.states, &m.alphabet, &m.initial, &m.finals),
        Model::ZGrammar(_) => unreachable!("grammars use GrammarFile"),
    };
    MachineFile {
        kind: m.kind_name().to_string(),
        version: FORMAT_VERSION,
        states: states.iter().cloned().collect(),
        alphabet: alphabet.iter().copied().collect(),
        stack_alphabet: None,
        counters: None,
        reversal_bound: None,
        variables: None,
        dimension: None,
        initial: initial.clone(),
        finals: finals.iter().cloned().collect(),
        transitions: Vec::new(),
        metadata: None,
    }
}

fn to_value<T: Serialize>(t: &T) -> serde_json::Value {
    serde_json::to_value(t).expect("serializable")
}

pub fn serialize_model(m: &Model, metadata: Option<serde_json::Value>) -> String {
    let value = match m {
        Model::ZGrammar(g) => to_value(&GrammarFile {
            kind: "zgrammar".to_string(),
            version: FORMAT_VERSION,
            nonterminals: g.nonterminals.iter().cloned().collect(),
            terminals: g.terminals.iter().copied().collect(),
            start: g.start.clone(),
            dimension: g.dimension,
            productions: g
                .productions
                .iter()
                .map(|p| ProductionFile {
                    id: p.id.clone(),
                    lhs: p.lhs.clone(),
                    rhs: p
                        .rhs
                        .iter()
                        .map(|s| match s {
                            Sym::Nt(a) => a.clone(),
                            Sym::T(c) => c.to_string(),
                        })
                        .collect(),
                    effect: dense(&p.effect, g.dimension),
                })
                .collect(),
            metadata,
        }),
        _ => {
            let mut file = machine_header(m);
            file.metadata = metadata;
            match m {
                Model::Rbca(m) => {
                    file.counters = Some(m.counters);
                    file.reversal_bound = Some(m.reversal_bound);
                    file.transitions = m
                        .transitions
                        .iter()
                        .map(|t| to_value(&OpTransitionFile::from_transition(t)))
                        .collect();
                }
                Model::Prbca(m) => {
                    file.counters = Some(m.counters);
                    file.reversal_bound = Some(m.reversal_bound);
                    file.stack_alphabet = Some(m.stack_alphabet.iter().cloned().collect());
                    file.transitions = m
                        .transitions
                        .iter()
                        .map(|t| to_value(&OpTransitionFile::from_transition(t)))
                        .collect();
                }
                Model::ZVass(m) => {
                    file.dimension = Some(m.dimension);
                    file.transitions = m
                        .transitions
                        .iter()
                        .map(|t| {
                            to_value(&EffTransitionFile {
                                from: t.from.clone(),
                                input: t.input.clone(),
                                effect: dense(&t.effect, m.dimension),
                                guard: None,
                                stack: None,
                                to: t.to.clone(),
                            })
                        })
                        .collect();
                }
                Model::ZVassG(m) => {
                    file.dimension = Some(m.dimension);
                    file.variables = Some(m.variables.iter().cloned().collect());
                    file.transitions = m
                        .transitions
                        .iter()
                        .map(|t| {
                            to_value(&EffTransitionFile {
                                from: t.from.clone(),
                                input: t.input.clone(),
                                effect: dense(&t.effect, m.dimension),
                                guard: Some(GuardFile::from_formula(&t.guard)),
                                stack: None,
                                to: t.to.clone(),
                            })
                        })
                        .collect();
                }
                Model::ZPvass(m) => {
                    file.dimension = Some(m.dimension);
                    file.stack_alphabet = Some(m.stack_alphabet.iter().cloned().collect());
                    file.transitions = m
                        .transitions
                        .iter()
                        .map(|t| {
                            to_value(&EffTransitionFile {
                                from: t.from.clone(),
                                input: t.input.clone(),
                                effect: dense(&t.effect, m.dimension),
                                guard: None,
                                stack: match &t.stack {
                                    Some(StackOp::Push(s)) => {
                                        Some(StackFile::Push { symbol: s.clone() })
                                    }
                                    Some(StackOp::Pop(s)) => {
                                        Some(StackFile::Pop { symbol: s.clone() })
                                    }
                                    None => None,
                                },
                                to: t.to.clone(),
                            })
                        })
                        .collect();
                }
                Model::ZGrammar(_) => unreachable!(),
            }
            to_value(&file)
        }
    };
    let mut out = serde_json::to_string_pretty(&value).expect("serializable");
    out.push('\n');
    out
}

fn required<T>(field: Option<T>, name: &str, kind: &str) -> Result<T, String> {
    field.ok_or_else(|| format!("{kind} file needs `{name}`"))
}

fn eff_vec(effect: &[i64], dim: usize) -> Result<SparseVec, String> {
    if effect.len() != dim {
        return Err(format!(
            "effect length {} does not match dimension {dim}",
            effect.len()
        ));
    }
    Ok(SparseVec::from_dense(effect))
}

fn parse_machine(v: serde_json::Value) -> Result<Model, String> {
    let file: MachineFile = serde_json::from_value(v).map_err(|e| e.to_string())?;
    if file.version != FORMAT_VERSION {
        return Err(format!("unsupported version {}", file.version));
    }
    let states: BTreeSet<String> = file.states.iter().cloned().collect();
    let alphabet: BTreeSet<char> = file.alphabet.iter().copied().collect();
    let finals: BTreeSet<String> = file.finals.iter().cloned().collect();
    match file.kind.as_str() {
        "rbca" | "nfa" => {
            let transitions = if file.kind == "nfa" {
                parse_transitions::<NfaTransitionFile>(file.transitions)?
                    .into_iter()
                    .map(NfaTransitionFile::into_transition)
                    .collect()
            } else {
                parse_transitions::<OpTransitionFile>(file.transitions)?
                    .into_iter()
                    .map(OpTransitionFile::into_transition)
                    .collect::<Result<Vec<_>, _>>()?
            };
            Ok(Model::Rbca(Rbca {
                states,
                alphabet,
                counters: file.counters.unwrap_or(0),
                reversal_bound: file.reversal_bound.unwrap_or(0),
                initial: file.initial,
                finals,
                transitions,
            }))
        }
        "prbca" => Ok(Model::Prbca(Prbca {
            states,
            alphabet,
            stack_alphabet: required(file.stack_alphabet, "stack_alphabet", "prbca")?
                .into_iter()
                .collect(),
            counters: required(file.counters, "counters", "prbca")?,
            reversal_bound: required(file.reversal_bound, "reversal_bound", "prbca")?,
            initial: file.initial,
            finals,
            transitions: parse_transitions::<OpTransitionFile>(file.transitions)?
                .into_iter()
                .map(OpTransitionFile::into_transition)
                .collect::<Result<Vec<_>, _>>()?,
        })),
        "zvass" => {
            let dimension = required(file.dimension, "dimension", "zvass")?;
            let transitions = parse_transitions::<EffTransitionFile>(file.transitions)?
                .into_iter()
                .map(|t| {
                    Ok(ZTransition {
                        from: t.from,
                        input: t.input,
                        effect: eff_vec(&t.effect, dimension)?,
                        to: t.to,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Model::ZVass(ZVass {
                states,
                alphabet,
                dimension,
                initial: file.initial,
                finals,
                transitions,
            }))
        }
        "zvassg" => {
            let dimension = required(file.dimension, "dimension", "zvassg")?;
            let transitions = parse_transitions::<EffTransitionFile>(file.transitions)?
                .into_iter()
                .map(|t| {
                    Ok(ZgTransition {
                        from: t.from,
                        input: t.input,
                        effect: eff_vec(&t.effect, dimension)?,
                        guard: t
                            .guard
                            .ok_or_else(|| "zvassg transitions need `guard`".to_string())?
                            .into_formula(),
                        to: t.to,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Model::ZVassG(ZVassG {
                states,
                alphabet,
                variables: required(file.variables, "variables", "zvassg")?
                    .into_iter()
                    .collect(),
                dimension,
                initial: file.initial,
                finals,
                transitions,
            }))
        }
        "zpvass" => {
            let dimension = required(file.dimension, "dimension", "zpvass")?;
            let transitions = parse_transitions::<EffTransitionFile>(file.transitions)?
                .into_iter()
                .map(|t| {
                    Ok(ZpTransition {
                        from: t.from,
                        input: t.input,
                        effect: eff_vec(&t.effect, dimension)?,
                        stack: t.stack.map(|s| match s {
                            StackFile::Push { symbol } => StackOp::Push(symbol),
                            StackFile::Pop { symbol } => StackOp::Pop(symbol),
                        }),
                        to: t.to,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Model::ZPvass(ZPvass {
                states,
                alphabet,
                stack_alphabet: required(file.stack_alphabet, "stack_alphabet", "zpvass")?
                    .into_iter()
                    .collect(),
                dimension,
                initial: file.initial,
                finals,
                transitions,
            }))
        }
        other => Err(format!("unknown machine kind `{other}`")),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NfaTransitionFile {
    from: String,
    input: String,
    to: String,
}

impl NfaTransitionFile {
    fn into_transition(self) -> RbcaTransition {
        RbcaTransition {
            from: self.from,
            input: self.input,
            op: CounterOp::Nop,
            to: self.to,
        }
    }
}

fn parse_grammar(v: serde_json::Value) -> Result<Model, String> {
    let file: GrammarFile = serde_json::from_value(v).map_err(|e| e.to_string())?;
    if file.version != FORMAT_VERSION {
        return Err(format!("unsupported version {}", file.version));
    }
    let nonterminals: BTreeSet<String> = file.nonterminals.iter().cloned().collect();
    let productions = file
        .productions
        .into_iter()
        .map(|p| {
            let rhs = p
                .rhs
                .iter()
                .map(|s| {
                    if nonterminals.contains(s) {
                        Ok(Sym::Nt(s.clone()))
                    } else {
                        let mut chars = s.chars();
                        match (chars.next(), chars.next()) {
                            (Some(c), None) => Ok(Sym::T(c)),
                            _ => Err(format!(
                                "rhs entry `{s}` is neither a nonterminal nor a letter"
                            )),
                        }
                    }
                })
                .collect::<Result<Vec<_>, String>>()?;
            let effect = if p.effect.is_empty() && file.dimension > 0 {
                SparseVec::new()
            } else {
                eff_vec(&p.effect, file.dimension)?
            };
            Ok(Production {
                id: p.id,
                lhs: p.lhs,
                rhs,
                effect,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Model::ZGrammar(ZGrammar {
        nonterminals,
        terminals: file.terminals.into_iter().collect(),
        start: file.start,
        dimension: file.dimension,
        productions,
    }))
}

pub fn parse_model(text: &str) -> Result<Model, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let kind = v
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| "missing `kind`".to_string())?;
    match kind {
        "zgrammar" | "cfg" => parse_grammar(v),
        _ => parse_machine(v),
    }
}

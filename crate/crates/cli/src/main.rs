use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rbca_core::convert::{
    rbca1_to_zvassg, to_zgrammar_model, to_zvass_model, zvass_to_rbca, ConvertOptions,
};
use rbca_core::growth::{classify_growth, count_words, GrowthClass};
use rbca_core::models::{accepts, enumerate_language, validate, Model, SimCaps, Tri};
use rbca_core::normalize::{
    binarize_zgrammar, binarize_zvass, reduce_reversals_to_one, reduce_reversals_to_one_prbca,
};
use rbca_core::unbounded::{decide_predicate, DecisionCaps, PredicateSpec};

use rbca_cli::json;

#[derive(Parser)]
#[command(name = "rbca", about = "Counter-automaton conversions and deciders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Unary,
    Rev1,
    Zvass,
    Zvassg,
    Zgrammar,
    Rbca,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a model file to another kind or normal form.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(short, long)]
        output: PathBuf,
        /// Use the simpler claim encoding without auxiliary counters
        /// (unsound for nonzero tests).
        #[arg(long)]
        paper_literal: bool,
    },
    /// Decide an unboundedness predicate; exit 0 holds, 1 fails,
    /// 3 unknown, 2 error.
    Decide {
        input: PathBuf,
        #[arg(long)]
        pred: String,
        #[arg(long)]
        cap: Option<i64>,
        /// Print the witness object.
        #[arg(long)]
        witness: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Classify a language as polynomial or exponential growth.
    Growth {
        input: PathBuf,
        /// Also print the cumulative count table up to this length.
        #[arg(long)]
        empirical: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Test membership of a word; exit 0 member, 1 not, 3 unknown.
    Member {
        input: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// List all accepted words up to a length bound.
    Enumerate {
        input: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Compare two models by exact bounded enumeration; exit 0 iff equal.
    OracleDiff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
}

fn load(path: &PathBuf) -> Result<Model, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    json::parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn fail(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn cmd_convert(
    input: PathBuf,
    to: Target,
    output: PathBuf,
    paper_literal: bool,
) -> ExitCode {
    let model = match load(&input) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let opts = ConvertOptions { paper_literal };
    let stage: &str;
    let converted = match (to, &model) {
        (Target::Unary, Model::ZVass(m)) => {
            stage = "binarize_zvass";
            Some(Model::ZVass(binarize_zvass(m)))
        }
        (Target::Unary, Model::ZGrammar(g)) => {
            stage = "binarize_zgrammar";
            Some(Model::ZGrammar(binarize_zgrammar(g)))
        }
        (Target::Rev1, Model::Rbca(m)) => {
            stage = "reduce_reversals_to_one";
            Some(Model::Rbca(reduce_reversals_to_one(m)))
        }
        (Target::Rev1, Model::Prbca(m)) => {
            stage = "reduce_reversals_to_one";
            Some(Model::Prbca(reduce_reversals_to_one_prbca(m)))
        }
        (Target::Zvass, m) => {
            stage = "to_zvass";
            to_zvass_model(m, &opts).map(Model::ZVass)
        }
        (Target::Zvassg, Model::Rbca(m)) => {
            stage = "claim_encoding";
            match rbca1_to_zvassg(m, &opts) {
                Ok(g) => Some(Model::ZVassG(g)),
                Err(e) => return fail(format!("{e:?}")),
            }
        }
        (Target::Zgrammar, m) => {
            stage = "to_zgrammar";
            Some(Model::ZGrammar(to_zgrammar_model(m)))
        }
        (Target::Rbca, Model::ZVass(m)) => {
            stage = "zvass_to_rbca";
            Some(Model::Rbca(zvass_to_rbca(m)))
        }
        (Target::Rbca, Model::Rbca(m)) => {
            stage = "identity";
            Some(Model::Rbca(m.clone()))
        }
        _ => {
            return fail(format!(
                "no conversion from {} to the requested target",
                model.kind_name()
            ))
        }
    };
    let Some(converted) = converted else {
        return fail(format!(
            "no conversion from {} to the requested target",
            model.kind_name()
        ));
    };
    let diags = validate(&converted);
    if !diags.is_empty() {
        return fail(format!("converted model fails validation: {diags:?}"));
    }
    let metadata = serde_json::json!({
        "source": input.display().to_string(),
        "source_kind": model.kind_name(),
        "stages": [stage],
    });
    let text = json::serialize_model(&converted, Some(metadata));
    if let Err(e) = std::fs::write(&output, text) {
        return fail(format!("{}: {e}", output.display()));
    }
    ExitCode::SUCCESS
}

fn cmd_decide(
    input: PathBuf,
    pred: String,
    cap: Option<i64>,
    witness: bool,
    format: Format,
) -> ExitCode {
    let model = match load(&input) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let Some(spec) = PredicateSpec::by_name(&pred) else {
        return fail(format!("unknown predicate `{pred}`"));
    };
    let mut caps = DecisionCaps::default();
    if let Some(c) = cap {
        caps.solve_cap = c;
    }
    let report = match decide_predicate(&model, &spec, &caps) {
        Ok(r) => r,
        Err(e) => return fail(format!("{e}")),
    };
    let verdict = match report.outcome {
        Tri::Yes => "holds",
        Tri::No => "fails",
        Tri::Unknown => "unknown",
    };
    match format {
        Format::Text => {
            println!(
                "{pred} on {}: {verdict} (solve_cap={}, word_len={}, state_cap={}, pump_budget={})",
                model.kind_name(),
                caps.solve_cap,
                caps.word_len,
                caps.state_cap,
                caps.pump_budget
            );
            if witness {
                if let Some(w) = &report.witness {
                    println!("witness: {w:?}");
                }
                for line in &report.trace {
                    println!("trace: {line:?}");
                }
            }
        }
        Format::Json => {
            let w = report.witness.as_ref().map(|w| {
                serde_json::json!({
                    "nonterminals": w.nonterminals.iter().collect::<Vec<_>>(),
                    "nonterminal": w.nonterminal,
                    "cancelable": w.cancelable.iter().collect::<Vec<_>>(),
                    "words": w.words,
                    "word": w.word,
                })
            });
            let out = serde_json::json!({
                "predicate": pred,
                "kind": model.kind_name(),
                "outcome": verdict,
                "caps": {
                    "solve_cap": caps.solve_cap,
                    "word_len": caps.word_len,
                    "state_cap": caps.state_cap,
                    "pump_budget": caps.pump_budget,
                },
                "witness": if witness { w } else { None },
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
    }
    match report.outcome {
        Tri::Yes => ExitCode::SUCCESS,
        Tri::No => ExitCode::from(1),
        Tri::Unknown => ExitCode::from(3),
    }
}

fn cmd_growth(input: PathBuf, empirical: Option<usize>, format: Format) -> ExitCode {
    let model = match load(&input) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let caps = DecisionCaps::default();
    let report = match classify_growth(&model, &caps) {
        Ok(r) => r,
        Err(e) => return fail(format!("{e}")),
    };
    let class = match report.class {
        GrowthClass::Polynomial => "polynomial",
        GrowthClass::Exponential => "exponential",
        GrowthClass::Unknown => "unknown",
    };
    let table = empirical.map(|m| count_words(&model, m));
    match format {
        Format::Text => {
            println!("growth: {class} (solve_cap={})", caps.solve_cap);
            if !report.witness.is_empty() {
                println!("witness pair: {:?}", report.witness);
            }
            if let Some(e) = report.empirical {
                println!("empirical threshold check: {e}");
            }
            if let Some(counts) = &table {
                for (m, g) in counts.iter().enumerate() {
                    match g {
                        Some(g) => println!("g(<={m}) = {g}"),
                        None => println!("g(<={m}) = ? (capped)"),
                    }
                }
            }
        }
        Format::Json => {
            let out = serde_json::json!({
                "class": class,
                "witness": report.witness,
                "empirical": report.empirical,
                "counts": table,
                "caps": { "solve_cap": caps.solve_cap },
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
    }
    ExitCode::SUCCESS
}

fn cmd_member(input: PathBuf, word: String) -> ExitCode {
    let model = match load(&input) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    match accepts(&model, &word, &SimCaps::for_len(word.len())) {
        Tri::Yes => {
            println!("member");
            ExitCode::SUCCESS
        }
        Tri::No => {
            println!("not a member");
            ExitCode::from(1)
        }
        Tri::Unknown => {
            println!("unknown (simulation capped)");
            ExitCode::from(3)
        }
    }
}

fn cmd_enumerate(input: PathBuf, max_len: usize) -> ExitCode {
    let model = match load(&input) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let r = enumerate_language(&model, max_len, &SimCaps::for_len(max_len));
    for w in &r.words {
        if w.is_empty() {
            println!("(empty word)");
        } else {
            println!("{w}");
        }
    }
    eprintln!(
        "{} words up to length {max_len}{}",
        r.words.len(),
        if r.exact { "" } else { " (inexact)" }
    );
    if r.exact {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn cmd_oracle_diff(a: PathBuf, b: PathBuf, max_len: usize) -> ExitCode {
    let (ma, mb) = match (load(&a), load(&b)) {
        (Ok(ma), Ok(mb)) => (ma, mb),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let ra = enumerate_language(&ma, max_len, &SimCaps::for_len(max_len));
    let rb = enumerate_language(&mb, max_len, &SimCaps::for_len(max_len));
    if !ra.exact || !rb.exact {
        return fail("enumeration was not exact at this length".to_string());
    }
    let only_a: BTreeSet<_> = ra.words.difference(&rb.words).collect();
    let only_b: BTreeSet<_> = rb.words.difference(&ra.words).collect();
    if only_a.is_empty() && only_b.is_empty() {
        println!("languages agree up to length {max_len} ({} words)", ra.words.len());
        return ExitCode::SUCCESS;
    }
    for w in only_a {
        println!("only in {}: {w:?}", a.display());
    }
    for w in only_b {
        println!("only in {}: {w:?}", b.display());
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Convert {
            input,
            to,
            output,
            paper_literal,
        } => cmd_convert(input, to, output, paper_literal),
        Command::Decide {
            input,
            pred,
            cap,
            witness,
            format,
        } => cmd_decide(input, pred, cap, witness, format),
        Command::Growth {
            input,
            empirical,
            format,
        } => cmd_growth(input, empirical, format),
        Command::Member { input, word } => cmd_member(input, word),
        Command::Enumerate { input, max_len } => cmd_enumerate(input, max_len),
        Command::OracleDiff { a, b, max_len } => cmd_oracle_diff(a, b, max_len),
    }
}

//! `dpl`: decide, prove, build models and canonical prefixes from the shell.
//!
//! Exit codes: 0 positive verdict, 1 negative verdict, 2 input error,
//! 3 internal limit exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use dpl_core::canonical::{self, metric_dc, CanonicalError, Distance, FiniteMeasure, SaturatedPrefix};
use dpl_core::decide;
use dpl_core::models::{self, FiniteDmm, ModelError};
use dpl_core::proof::{self, check_derivation, parse_derivation, Derivation, Mode};
use dpl_core::rational::display;
use dpl_core::syntax::{enum_formula_big, formula_index};
use dpl_core::Formula;

#[derive(Parser)]
#[command(name = "dpl", version, about = "Decision procedure and canonical-model tools for probabilistic dynamic logic")]
struct Cli {
    /// print a JSON object instead of plain text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability (exit 0 SAT, 1 UNSAT)
    Sat { formula: String },
    /// Decide validity (exit 0 valid, 1 not valid)
    Valid { formula: String },
    /// Decide derivability from hypotheses, or check a derivation file
    Prove(ProveArgs),
    /// Build a finite model of a satisfiable formula
    Witness {
        formula: String,
        /// write the model JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a formula in a model file
    Check {
        model: PathBuf,
        formula: String,
        /// world name; without it the formula must hold at every world
        #[arg(long)]
        world: Option<String>,
    },
    /// Build a finite prefix of the Lindenbaum saturation of a seed
    Lindenbaum {
        seed: String,
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disagreement distance of two prefixes or Prokhorov distance of two measures
    Dist(DistArgs),
    /// Print the i-th formula of the enumeration, or the index of a formula
    Enum {
        #[arg(required_unless_present = "index")]
        i: Option<String>,
        #[arg(long, conflicts_with = "i")]
        index: Option<String>,
    },
}

#[derive(Args)]
struct ProveArgs {
    #[arg(required_unless_present = "derivation")]
    formula: Option<String>,
    /// hypothesis formula, repeatable
    #[arg(long = "hyp")]
    hyps: Vec<String>,
    /// check a `formula ; justification` file instead
    #[arg(long, conflicts_with = "formula")]
    derivation: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DistOperands {
    /// two measure JSON files
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    measures: Option<Vec<PathBuf>>,
    /// two prefix JSON files or seed formulas
    #[arg(long, num_args = 2, value_names = ["S1", "S2"], requires = "budget")]
    prefixes: Option<Vec<String>>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    operands: DistOperands,
    #[arg(long)]
    budget: Option<u64>,
}

enum Failure {
    Input(String),
    Limit(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CanonicalError> for Failure {
    fn from(e: CanonicalError) -> Self {
        match e {
            CanonicalError::LimitExceeded(_) | CanonicalError::NotFoundWithinBound(_) => Failure::Limit(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

/// A verdict line for stdout plus its JSON form.
struct Report {
    positive: bool,
    text: String,
    json: Value,
}

fn parse_formula(text: &str) -> Result<Formula, Failure> {
    text.parse().map_err(|e| Failure::Input(format!("cannot parse '{text}': {e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn verdict(positive: bool, yes: &str, no: &str) -> Report {
    let word = if positive { yes } else { no };
    Report { positive, text: word.to_string(), json: json!({ "verdict": word }) }
}

fn load_model(path: &Path) -> Result<FiniteDmm, Failure> {
    let m = FiniteDmm::from_json(&read(path)?)?;
    let problems = models::validate(&m);
    if !problems.is_empty() {
        return Err(ModelError::Malformed(problems).into());
    }
    Ok(m)
}

fn prefix_operand(operand: &str, budget: u64) -> Result<SaturatedPrefix, Failure> {
    let path = Path::new(operand);
    if path.is_file() {
        return Ok(SaturatedPrefix::from_json(&read(path)?)?);
    }
    Ok(canonical::lindenbaum(&parse_formula(operand)?, budget)?)
}

fn run(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Sat { formula } => Ok(verdict(decide::sat(&parse_formula(&formula)?).is_sat(), "SAT", "UNSAT")),
        Command::Valid { formula } => Ok(verdict(decide::valid(&parse_formula(&formula)?), "VALID", "NOT VALID")),
        Command::Prove(args) => prove(args),
        Command::Witness { formula, out } => {
            let f = parse_formula(&formula)?;
            let Some(w) = decide::witness(&f) else {
                return Ok(verdict(false, "SAT", "UNSAT"));
            };
            let root = w.model.worlds[w.root].clone();
            let model_json = w.model.to_json()?;
            let text = match &out {
                Some(path) => {
                    write(path, &model_json)?;
                    format!("SAT root {root}")
                }
                None => format!("SAT root {root}\n{model_json}"),
            };
            let model_value: Value = serde_json::from_str(&model_json).expect("model JSON is well formed");
            Ok(Report { positive: true, text, json: json!({ "verdict": "SAT", "root": root, "model": model_value }) })
        }
        Command::Check { model, formula, world } => {
            let m = load_model(&model)?;
            let f = parse_formula(&formula)?;
            let holds = match &world {
                Some(name) => models::check_named(&m, name, &f)?,
                None => models::extension(&m, &f)?.len() == m.len(),
            };
            Ok(verdict(holds, "HOLDS", "FAILS"))
        }
        Command::Lindenbaum { seed, budget, out } => {
            let seed = parse_formula(&seed)?;
            let w = match canonical::lindenbaum(&seed, budget) {
                Err(CanonicalError::InconsistentSeed) => return Ok(verdict(false, "CONSISTENT", "INCONSISTENT")),
                other => other?,
            };
            let prefix_json = w.to_json()?;
            let summary = format!(
                "prefix of {} stages, {} formulas added, {} Archimedean extras",
                w.budget(),
                w.decided().iter().filter(|b| **b).count(),
                w.extras().len()
            );
            let text = match &out {
                Some(path) => {
                    write(path, &prefix_json)?;
                    summary
                }
                None => prefix_json.clone(),
            };
            let prefix_value: Value = serde_json::from_str(&prefix_json).expect("prefix JSON is well formed");
            Ok(Report { positive: true, text, json: json!({ "verdict": "CONSISTENT", "prefix": prefix_value }) })
        }
        Command::Dist(args) => dist(args),
        Command::Enum { i, index } => {
            if let Some(text) = index {
                let n = formula_index(&parse_formula(&text)?);
                return Ok(Report { positive: true, text: n.to_string(), json: json!({ "index": n.to_string() }) });
            }
            let i = i.expect("clap requires i or --index");
            let n: BigUint = i.parse().map_err(|_| Failure::Input(format!("'{i}' is not a natural number")))?;
            let f = enum_formula_big(&n).to_string();
            Ok(Report { positive: true, text: f.clone(), json: json!({ "index": n.to_string(), "formula": f }) })
        }
    }
}

fn prove(args: ProveArgs) -> Result<Report, Failure> {
    let hyps = args.hyps.iter().map(|h| parse_formula(h)).collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = args.derivation {
        let steps = parse_derivation(&read(&path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let mode = if hyps.is_empty() { Mode::Theorem } else { Mode::FromHypotheses(hyps) };
        let d = Derivation { steps, mode };
        return Ok(match check_derivation(&d) {
            Ok(()) => {
                let conclusion = d.conclusion().expect("accepted derivations are nonempty").to_string();
                Report {
                    positive: true,
                    text: format!("ACCEPTED {conclusion}"),
                    json: json!({ "verdict": "ACCEPTED", "conclusion": conclusion }),
                }
            }
            Err(r) => Report {
                positive: false,
                text: format!("REJECTED at step {}: {}", r.step, r.reason),
                json: json!({ "verdict": "REJECTED", "step": r.step, "reason": r.reason }),
            },
        });
    }
    let f = parse_formula(&args.formula.expect("clap requires a formula or --derivation"))?;
    Ok(verdict(proof::derives(&hyps, &f), "DERIVABLE", "NOT DERIVABLE"))
}

fn dist(args: DistArgs) -> Result<Report, Failure> {
    if let Some(paths) = args.operands.measures {
        let mu = FiniteMeasure::from_json(&read(&paths[0])?)?;
        let nu = FiniteMeasure::from_json(&read(&paths[1])?)?;
        let d = display(&canonical::prokhorov(&mu, &nu)?);
        return Ok(Report { positive: true, text: d.clone(), json: json!({ "prokhorov": d }) });
    }
    let operands = args.operands.prefixes.expect("clap requires one operand group");
    let budget = args.budget.expect("clap requires --budget with --prefixes");
    let mut w1 = prefix_operand(&operands[0], budget)?;
    let mut w2 = prefix_operand(&operands[1], budget)?;
    Ok(match metric_dc(&mut w1, &mut w2, budget)? {
        Distance::Exact(d) => {
            let d = display(&d);
            Report { positive: true, text: d.clone(), json: json!({ "distance": d, "exact": true }) }
        }
        Distance::UpperBound(d) => {
            let d = display(&d);
            Report { positive: true, text: format!("<= {d}"), json: json!({ "distance": d, "exact": false }) }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.json);
            } else {
                println!("{}", report.text);
            }
            ExitCode::from(if report.positive { 0 } else { 1 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("dpl: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(msg)) => {
            eprintln!("dpl: {msg}");
            ExitCode::from(3)
        }
    }
}

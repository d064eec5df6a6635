//! Command-line front end: parse, ground, translate, check, and solve
//! fuzzy answer set programs.
//!
//! Exit codes: 0 success, 1 no answer set, 2 usage or parse errors,
//! 3 fragment violations (t-conorm bodies, product connectives, or Goedel
//! negation on the MILP path). Structured output is JSON on stdout;
//! diagnostics go to stderr. Identical invocations produce byte-identical
//! output; the `FASPKIT_SEED` environment variable is reserved but unused
//! because every stage is deterministic.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use faspkit::assat::{check, solve, Backend, LoopMode, SolveOptions};
use faspkit::milp::{encode, lp_format};
use faspkit::semantics::grid_answer_sets;
use faspkit::syntax::SyntaxError;
use faspkit::translate::completion;
use faspkit::{Interpretation, Program};

#[derive(Parser)]
#[command(
    name = "faspkit",
    version,
    about = "Fuzzy answer set programming toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum BackendArg {
    #[default]
    Milp,
    Grid,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum LoopModeArg {
    #[default]
    All,
    Maximal,
}

#[derive(Subcommand)]
enum Command {
    /// Find an answer set.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Milp)]
        backend: BackendArg,
        /// Grid resolution for the grid backend (at least 1).
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        grid_denominator: u32,
        #[arg(long, value_enum, default_value_t = LoopModeArg::All)]
        loop_mode: LoopModeArg,
        /// Guard on the difference-support size for exhaustive loop search.
        #[arg(long, default_value_t = 16)]
        max_support: usize,
        /// Print the full iteration trace instead of just the answer set.
        #[arg(long)]
        trace: bool,
        /// Keep normalization auxiliaries in the reported answer set.
        #[arg(long)]
        include_aux: bool,
        #[arg(long)]
        pretty: bool,
    },
    /// Diagnose an interpretation: model-ness, completion satisfaction,
    /// reduct fixpoint, and violated loop formulas.
    Check {
        file: PathBuf,
        /// Interpretation as inline JSON (`{"a":"0.8"}`) or `@path.json`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        pretty: bool,
    },
    /// Print the completion theory, one constraint per line.
    Complete { file: PathBuf },
    /// Print the loops of the positive dependency graph, one JSON array
    /// per line.
    Loops {
        file: PathBuf,
        /// Print only maximal loops (no enumeration guard applies).
        #[arg(long)]
        maximal: bool,
    },
    /// Parse, desugar, and ground a program, printing the result.
    Ground { file: PathBuf },
    /// Export the completion as a mixed-integer model in LP text format.
    ExportLp { file: PathBuf },
    /// Enumerate all answer sets with values on a finite grid.
    Oracle {
        file: PathBuf,
        /// Grid resolution (at least 1).
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        grid_denominator: u32,
        #[arg(long)]
        include_aux: bool,
        #[arg(long)]
        pretty: bool,
    },
}

enum Failure {
    NoAnswerSet,
    Usage(String),
    Fragment(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::NoAnswerSet => ExitCode::from(1),
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Fragment(_) => ExitCode::from(3),
        }
    }
}

fn classify_syntax(err: SyntaxError) -> Failure {
    match &err {
        SyntaxError::TConormBody { .. } | SyntaxError::Product { .. } => {
            Failure::Fragment(err.to_string())
        }
        _ => Failure::Usage(err.to_string()),
    }
}

fn load_program(file: &PathBuf) -> Result<Program, Failure> {
    let text = fs::read_to_string(file)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", file.display())))?;
    Program::parse_source(&text).map_err(classify_syntax)
}

fn load_model(source: &str) -> Result<Interpretation, Failure> {
    let text = match source.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?,
        None => source.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid model JSON: {e}")))
}

fn emit<T: serde::Serialize>(value: &T, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(value).expect("serializable output")
    } else {
        serde_json::to_string(value).expect("serializable output")
    };
    println!("{text}");
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            file,
            backend,
            grid_denominator,
            loop_mode,
            max_support,
            trace,
            include_aux,
            pretty,
        } => {
            let program = load_program(&file)?;
            let options = SolveOptions {
                backend: match backend {
                    BackendArg::Milp => Backend::Milp,
                    BackendArg::Grid => Backend::Grid {
                        denominator: grid_denominator,
                    },
                },
                loop_mode: match loop_mode {
                    LoopModeArg::All => LoopMode::All,
                    LoopModeArg::Maximal => LoopMode::Maximal,
                },
                max_support,
            };
            let result = solve(&program, &options).map_err(|e| {
                if e.is_fragment_violation() {
                    Failure::Fragment(e.to_string())
                } else {
                    Failure::Usage(e.to_string())
                }
            })?;
            let answer = result.answer_set().map(|i| {
                if include_aux {
                    i.clone()
                } else {
                    i.without_aux()
                }
            });
            if trace {
                emit(&result, pretty);
            } else {
                emit(&json!({ "answer_set": answer }), pretty);
            }
            match answer {
                Some(_) => Ok(()),
                None => {
                    eprintln!("no answer set");
                    Err(Failure::NoAnswerSet)
                }
            }
        }
        Command::Check {
            file,
            model,
            pretty,
        } => {
            let program = load_program(&file)?;
            let interpretation = load_model(&model)?;
            let report =
                check(&program, &interpretation).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(&report, pretty);
            Ok(())
        }
        Command::Complete { file } => {
            let program = load_program(&file)?;
            print!("{}", completion(&program));
            Ok(())
        }
        Command::Loops { file, maximal } => {
            let program = load_program(&file)?;
            let graph = faspkit::graph::build_depgraph(&program);
            let scope = program.herbrand_base().clone();
            let loops = if maximal {
                graph.maximal_loops(&scope)
            } else {
                graph
                    .all_loops(&scope)
                    .map_err(|e| Failure::Usage(format!("{e}; rerun with --maximal")))?
            };
            for l in loops {
                emit(&l, false);
            }
            Ok(())
        }
        Command::Ground { file } => {
            let program = load_program(&file)?;
            print!("{program}");
            Ok(())
        }
        Command::ExportLp { file } => {
            let program = load_program(&file)?;
            let model =
                encode(&completion(&program)).map_err(|e| Failure::Fragment(e.to_string()))?;
            print!("{}", lp_format(&model));
            Ok(())
        }
        Command::Oracle {
            file,
            grid_denominator,
            include_aux,
            pretty,
        } => {
            let program = load_program(&file)?;
            let sets = grid_answer_sets(&program, grid_denominator)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let reported: Vec<Interpretation> = sets
                .into_iter()
                .map(|i| if include_aux { i } else { i.without_aux() })
                .collect();
            emit(&reported, pretty);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::NoAnswerSet => {}
                Failure::Usage(msg) | Failure::Fragment(msg) => eprintln!("error: {msg}"),
            }
            failure.exit_code()
        }
    }
}

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use eqover::cli::{parse, run, Command, Envelope, RunError, RunOptions, DEFAULT_MAX_INDEX, SCHEMA_VERSION};
use eqover::corpus::{example_system, CURATED};
use eqover::cosets::DEFAULT_MAX_COSETS;
use eqover::solver::{DEFAULT_BUDGET, DEFAULT_ORDER_CAP};

/// Equations over groups: nonsingularity, subgroup presentations, covering
/// homology, theorem hypotheses and a finite solver.
#[derive(Parser)]
#[command(name = "eqover", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Emit JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Coset limit for coset enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_COSETS)]
    max_cosets: usize,
    /// Largest subgroup index for low-index searches.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_INDEX)]
    max_index: usize,
    /// Node budget shared by all solver attempts.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Largest overgroup the solver builds.
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER_CAP)]
    order_cap: usize,
    /// Run on every built-in document instead of FILE.
    #[arg(long, global = true)]
    seed_corpus: bool,
}

#[derive(Args)]
struct Input {
    /// Input document.
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exponent matrix, contents, conjugacy into factors and theorem hypotheses.
    Analyze(Input),
    /// Low-index subgroups with their Schreier presentations.
    Subgroups {
        #[command(flatten)]
        input: Input,
        /// Presented or free factor to use instead of the content presentation.
        #[arg(long)]
        group: Option<String>,
    },
    /// Homology of the covering complex of one listed subgroup.
    Homology {
        #[command(flatten)]
        input: Input,
        /// Subgroup id from `subgroups`.
        #[arg(long)]
        index_table: usize,
        #[arg(long)]
        group: Option<String>,
    },
    /// Search for solutions in finite overgroups.
    Solve(Input),
    /// Orbit system over the subgroup directive A.
    Rewrite {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        normal: String,
    },
}

/// Prints a line; a closed pipe ends the process quietly.
fn emit(args: std::fmt::Arguments) {
    if let Err(e) = writeln!(io::stdout().lock(), "{args}") {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut opts = RunOptions {
        max_cosets: cli.max_cosets,
        max_index: cli.max_index,
        budget: cli.budget,
        order_cap: cli.order_cap,
        group: None,
    };
    let (command, input) = match cli.command {
        Cmd::Analyze(i) => (Command::Analyze, i),
        Cmd::Subgroups { input, group } => {
            opts.group = group;
            (Command::Subgroups, input)
        }
        Cmd::Homology { input, index_table, group } => {
            opts.group = group;
            (Command::Homology { id: index_table }, input)
        }
        Cmd::Solve(i) => (Command::Solve, i),
        Cmd::Rewrite { input, normal } => (Command::Rewrite { normal }, input),
    };

    let sources: Vec<(String, String)> = if cli.seed_corpus {
        let mut docs: Vec<(String, String)> = CURATED.iter().map(|d| (d.name.to_string(), d.text.to_string())).collect();
        for k in [9, 2022] {
            docs.push((format!("example-system-k{k}"), example_system(k)));
        }
        docs
    } else {
        let Some(path) = input.file else {
            eprintln!("error: an input file is required unless --seed-corpus is given");
            return ExitCode::from(2);
        };
        match std::fs::read_to_string(&path) {
            Ok(text) => vec![(path.display().to_string(), text)],
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
    };

    let mut failed = false;
    let mut entries = Vec::new();
    for (name, text) in &sources {
        let result = parse(text).map_err(|e| format!("{name}: {e}")).and_then(|doc| match run(&doc, &command, &opts) {
            Ok(r) => Ok(Some(r)),
            Err(RunError::NotApplicable(why)) if cli.seed_corpus => {
                entries.push(json!({ "source": name, "skipped": why }));
                if !cli.json {
                    emit(format_args!("== {name}: skipped ({why})\n"));
                }
                Ok(None)
            }
            Err(e) => Err(format!("{name}: {e}")),
        });
        match result {
            Ok(Some(report)) => {
                if cli.json {
                    let env = Envelope {
                        schema: SCHEMA_VERSION,
                        source: name,
                        report: &report,
                    };
                    entries.push(serde_json::to_value(env).expect("reports serialize"));
                } else {
                    if cli.seed_corpus {
                        emit(format_args!("== {name}"));
                    }
                    emit(format_args!("{report}"));
                }
            }
            Ok(None) => {}
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    if cli.json {
        let out = if cli.seed_corpus {
            json!({ "schema": SCHEMA_VERSION, "corpus": entries })
        } else {
            entries.pop().unwrap_or(serde_json::Value::Null)
        };
        if !out.is_null() {
            emit(format_args!("{}", serde_json::to_string_pretty(&out).expect("json")));
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

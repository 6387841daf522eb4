//! `mfilt`: filtrations, fusion filtrations and bounded model search for
//! finite multimodal Kripke models.
//!
//! Every invocation prints one JSON report on stdout. Exit codes: 0 positive
//! verdict, 1 negative verdict, 2 usage or format error, 3 budget exceeded.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Outcome};

#[derive(Parser)]
#[command(name = "mfilt", version, about = "Filtrations of finite multimodal Kripke models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truth set of a formula in a model.
    Eval { model: PathBuf, formula: String },
    /// Filter a model through Γ for a logic.
    Filter {
        model: PathBuf,
        /// Γ, one formula per line; Sub-closed automatically.
        #[arg(long)]
        gamma: PathBuf,
        /// Logic, e.g. `S4`, `K+<>^3p-><>p`, or `a:K5,b:S4` for a fusion.
        #[arg(long)]
        logic: String,
        /// Strategy; defaults to the logic's own.
        #[arg(long)]
        strategy: Option<String>,
        /// Writes PREFIX.json (quotient) and PREFIX.cert.json (sidecar).
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Fusion filtration with one logic per modality group.
    FuseFilter {
        model: PathBuf,
        #[arg(long)]
        gamma: PathBuf,
        /// Component logics, e.g. `a:K5,b:S4`.
        #[arg(long)]
        logics: String,
        /// Include every pipeline stage in the report.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Re-check a claimed filtration.
    CheckFiltration {
        model: PathBuf,
        quotient: PathBuf,
        /// Sidecar JSON or a plain `{"state": "block"}` object.
        map: PathBuf,
        #[arg(long)]
        gamma: PathBuf,
    },
    /// Bounded search for a model of a formula.
    Sat {
        formula: String,
        #[command(flatten)]
        search: Search,
    },
    /// Bounded search for a countermodel to a formula.
    Valid {
        formula: String,
        #[command(flatten)]
        search: Search,
    },
    /// Check a model's definable algebra against axioms.
    Algebra {
        model: PathBuf,
        /// Axioms, one formula per line.
        #[arg(long)]
        axioms: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
    /// Coarsest bisimulation respecting the given variables.
    Bisim {
        model: PathBuf,
        /// Comma-separated variables, e.g. `p0,p1`; default all valued ones.
        #[arg(long)]
        vars: Option<String>,
    },
}

#[derive(clap::Args, Clone, Copy)]
struct Caps {
    /// Cap on the size of the definable algebra.
    #[arg(long, default_value_t = 1 << 20)]
    cap: usize,
    /// Cap on axiom evaluations.
    #[arg(long, default_value_t = 1_000_000)]
    eval_cap: u64,
    /// Cap on free pairs for exhaustive relation search.
    #[arg(long, default_value_t = 20)]
    search_bound: u32,
}

#[derive(clap::Args)]
struct Search {
    /// Logics per modality, e.g. `a:K5,b:S4`.
    #[arg(long)]
    logics: String,
    #[arg(long, default_value_t = 4)]
    max_states: usize,
    /// Cap on candidate frames.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Skip frames isomorphic to an earlier one.
    #[arg(long)]
    iso_prune: bool,
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Eval { model, formula } => commands::eval(&model, &formula),
        Command::Filter {
            model,
            gamma,
            logic,
            strategy,
            out,
            caps,
        } => commands::filter(&model, &gamma, &logic, strategy.as_deref(), out.as_deref(), caps.into()),
        Command::FuseFilter {
            model,
            gamma,
            logics,
            trace,
            out,
            caps,
        } => commands::fuse_filter(&model, &gamma, &logics, trace, out.as_deref(), caps.into()),
        Command::CheckFiltration {
            model,
            quotient,
            map,
            gamma,
        } => commands::check_filtration(&model, &quotient, &map, &gamma),
        Command::Sat { formula, search } => commands::search(&formula, &search.into(), false),
        Command::Valid { formula, search } => commands::search(&formula, &search.into(), true),
        Command::Algebra { model, axioms, caps } => commands::algebra(&model, &axioms, caps.into()),
        Command::Bisim { model, vars } => commands::bisim(&model, vars.as_deref()),
    }
}

impl From<Caps> for modal_filtration::filtration::FilterOptions {
    fn from(c: Caps) -> Self {
        modal_filtration::filtration::FilterOptions {
            limits: modal_filtration::algebra::Limits {
                carrier_cap: c.cap,
                eval_cap: c.eval_cap,
            },
            search_bound: c.search_bound,
        }
    }
}

impl From<Search> for commands::SearchArgs {
    fn from(s: Search) -> Self {
        commands::SearchArgs {
            logics: s.logics,
            max_states: s.max_states,
            budget: s.budget,
            iso_prune: s.iso_prune,
        }
    }
}

fn emit(code: u8, report: serde_json::Value) -> ExitCode {
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprint!("{e}");
            let message = e.kind().to_string();
            return emit(2, serde_json::json!({ "error": "usage", "message": message }));
        }
    };
    match run(cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            emit(if outcome.positive { 0 } else { 1 }, outcome.report)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            emit(f.code, serde_json::json!({ "error": f.kind, "message": f.message }))
        }
    }
}

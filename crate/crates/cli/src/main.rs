//! `agentstab`: analyze, run and replay cooperative agent systems.
//!
//! Exit codes: 0 success or fixpoint, 1 oracle mismatch, 2 input error,
//! 3 horizon reached or divergence detected.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "agentstab",
    version,
    about = "Stability analysis for cooperative deductive agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a system and probe its I/O graph across Dmax values.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Replay the scenario's event list, then run fair rounds.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sched: Schedule,
    },
    /// Replay an explicit event list, or a recorded trace.
    Replay {
        #[command(flatten)]
        common: Common,
        /// File of event lines; defaults to the scenario's own list.
        #[arg(long, conflicts_with = "trace")]
        events: Option<PathBuf>,
        /// Recorded trace to re-execute.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a parametric family over a range: `chain` varies N, any other
    /// scenario varies Dmax.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sched: Schedule,
        /// Inclusive range `A..B` (or a single value).
        #[arg(long)]
        range: String,
    },
    /// Cross-check every agent model of a short run against brute force.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sched: Schedule,
        /// Largest universe checked by enumeration.
        #[arg(long, default_value_t = 20)]
        cap: usize,
        /// Corrupt one computed model to exercise the checker.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Builtin name (example3, routing5, routing5-example6-script, chain(N))
    /// or path to a scenario file.
    scenario: String,
    /// Override the largest distance constant.
    #[arg(long)]
    dmax: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Ndrecords)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct Schedule {
    /// Fair-round limit; defaults to a multiple of the I/O graph size.
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::RoundRobin)]
    policy: PolicyArg,
    /// Seed for the shuffled policy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Ndrecords,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    RoundRobin,
    Shuffled,
}

/// Exit status plus a diagnostic for stderr.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { common } => commands::analyze(&common),
        Command::Run { common, sched } => commands::run(&common, sched),
        Command::Replay {
            common,
            events,
            trace,
        } => commands::replay(&common, events.as_deref(), trace.as_deref()),
        Command::Sweep {
            common,
            sched,
            range,
        } => commands::sweep(&common, sched, &range),
        Command::OracleCheck {
            common,
            sched,
            cap,
            inject_fault,
        } => commands::oracle_check(&common, sched, cap, inject_fault),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("agentstab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

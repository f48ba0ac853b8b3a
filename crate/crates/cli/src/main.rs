use std::path::PathBuf;
use std::process::ExitCode;

use border_cli::{
    cmd_check, cmd_decompose, cmd_flow_check, cmd_general_check, cmd_optimal, cmd_simulate,
    CliError, Outcome,
};
use clap::{Parser, Subcommand};

/// Feasibility, implementation and revenue optimization for reduced-form
/// auctions. Reports are JSON on stdout; exit code 0 means success or
/// feasible, 1 bad input, 2 infeasible.
#[derive(Parser)]
#[command(name = "border", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the instance's reduced form with Border's condition.
    Check {
        instance: PathBuf,
        /// Check only this item (numbered from 1).
        #[arg(long, conflicts_with = "all_items")]
        item: Option<usize>,
        /// Check every item (the default).
        #[arg(long)]
        all_items: bool,
    },
    /// Implement the reduced form as lotteries over hierarchical mechanisms.
    Decompose {
        instance: PathBuf,
        /// Also write the distribution file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a distribution file on sampled profiles.
    Simulate {
        instance: PathBuf,
        distribution: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute a revenue-optimal BIC mechanism from the instance's values.
    Optimal { instance: PathBuf },
    /// Feasibility under general linear constraints, possibly correlated.
    GeneralCheck { instance: PathBuf },
    /// Feasibility under demand constraints as a multi-commodity flow.
    FlowCheck { instance: PathBuf },
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check { instance, item, .. } => cmd_check(&instance, item),
        Command::Decompose { instance, out } => cmd_decompose(&instance, out.as_deref()),
        Command::Simulate {
            instance,
            distribution,
            rounds,
            seed,
        } => cmd_simulate(&instance, &distribution, rounds, seed),
        Command::Optimal { instance } => cmd_optimal(&instance),
        Command::GeneralCheck { instance } => cmd_general_check(&instance),
        Command::FlowCheck { instance } => cmd_flow_check(&instance),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Outcome::from_error(&e)
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("report serializes")
    );
    ExitCode::from(outcome.exit as u8)
}

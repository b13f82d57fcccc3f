use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qzsg::cli::{cmd_gen_game, cmd_recurrence_sweep, cmd_run, GameKind};

/// Learning dynamics in two-player zero-sum quantum games: generate games,
/// run MMWU / replicator experiments and recurrence sweeps.
#[derive(Parser)]
#[command(name = "qzsg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a GameSpec JSON file and print its eigenvalue summary.
    GenGame {
        #[command(subcommand)]
        kind: GenGameKind,
    },
    /// Execute a run config (mmwu, replicator, find-nash, probes, ...).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Execute a recurrence-sweep config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenGameKind {
    /// The quantum Matching Pennies observable diag(1, -1, -1, 1).
    MatchingPennies {
        #[arg(long)]
        out: PathBuf,
    },
    /// Diagonal embedding of a classical payoff matrix (JSON array of rows).
    Diagonal {
        #[arg(long)]
        p_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unitary basis embedding of a square classical payoff matrix.
    Unitary {
        #[arg(long)]
        p_file: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded multi-qubit game with a uniform interior equilibrium.
    MultiQubit {
        #[arg(long)]
        qubits: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenGame { kind } => {
            let (kind, out) = match kind {
                GenGameKind::MatchingPennies { out } => (GameKind::MatchingPennies, out),
                GenGameKind::Diagonal { p_file, out } => (GameKind::Diagonal { p_file }, out),
                GenGameKind::Unitary { p_file, seed, out } => {
                    (GameKind::Unitary { p_file, seed }, out)
                }
                GenGameKind::MultiQubit { qubits, seed, out } => {
                    (GameKind::MultiQubit { qubits, seed }, out)
                }
            };
            cmd_gen_game(&kind, &out).map(|_| ())
        }
        Command::Run { config } => cmd_run(&config).map(|manifest| {
            println!(
                "run complete in {:.2}s; artifacts: {}",
                manifest.wall_time_s,
                manifest
                    .artifact_paths
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }),
        Command::Sweep { config } => cmd_recurrence_sweep(&config).map(|manifest| {
            println!(
                "sweep complete in {:.2}s over {} seeds",
                manifest.wall_time_s,
                manifest.seeds.len()
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qzsg: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

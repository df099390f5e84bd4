use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kef_cli::commands;
use kef_cli::CliError;

#[derive(Parser)]
#[command(name = "kef", version, about = "Runs kappa-entropy solver cases, sweeps and verification suites")]
struct Cli {
    /// Worker threads for sweeps and verification; 0 uses every core.
    #[arg(long, global = true, env = "KEF_WORKERS", default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrates one configured case.
    RunCase {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write the manifest only.
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Runs a kappa sweep against an endpoint reference.
    RunSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// kappa0 or kappa1.
        #[arg(long)]
        target: String,
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Runs a verification suite: identities, mms, identification or all.
    RunVerify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recomputes diagnostics from the snapshots of a finished run.
    Replay {
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints the grid and field statistics of a snapshot file.
    InspectSnapshot { path: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let w = cli.workers;
    let result: Result<(), CliError> = match cli.command {
        Command::RunCase { config, out, dry_run, seed } => commands::run_case(&config, &out, seed, w, dry_run),
        Command::RunSweep { config, out, target, dry_run, seed } => {
            commands::run_sweep(&config, &out, &target, seed, w, dry_run)
        }
        Command::RunVerify { suite, out, dry_run, seed } => commands::run_verify(&suite, &out, seed, w, dry_run),
        Command::Replay { out } => commands::replay(&out).map(|_| ()),
        Command::InspectSnapshot { path } => commands::inspect_snapshot(&path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

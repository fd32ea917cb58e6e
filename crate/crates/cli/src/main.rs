use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parity_teleport::protocol::MeasurementMode;
use parity_teleport_cli::{run, sweep, Overrides, RunSource};

#[derive(Parser)]
#[command(
    name = "parity-teleport",
    version,
    about = "Teleport a polarization qubit onto OAM parity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run exhaustively, plus Monte Carlo when trials > 0, and write a JSON report.
    Run(RunArgs),
    /// Run one exhaustive point per sweep value and write a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
    config: Option<PathBuf>,
    #[arg(long)]
    bench: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Projector,
    Apparatus,
}

impl From<Mode> for MeasurementMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Projector => MeasurementMode::Projector,
            Mode::Apparatus => MeasurementMode::Apparatus,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => {
            let source = match (&args.config, &args.bench) {
                (Some(c), _) => RunSource::Config(c),
                (None, Some(b)) => RunSource::Bench(b),
                (None, None) => unreachable!("clap requires one of --config and --bench"),
            };
            let overrides = Overrides {
                trials: args.trials,
                seed: args.seed,
                mode: args.mode.map(Into::into),
            };
            run(source, overrides, &args.out).map(|r| {
                log::info!(
                    "wrote {} (parity fidelity min {})",
                    args.out.display(),
                    r.fidelity.parity_post.min
                );
            })
        }
        Command::Sweep { config, out } => sweep(&config, &out).map(|rows| {
            log::info!("wrote {} rows to {}", rows.len(), out.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

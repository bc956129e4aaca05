use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use signet_cli::{run, Command, GridArgs};

#[derive(Parser)]
#[command(
    name = "signet",
    version,
    about = "Signed nonlinear diffusive networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Network config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Half-width N of the sample grid [-N, N].
    #[arg(long = "grid-n")]
    grid_n: Option<f64>,
    /// Number of grid samples.
    #[arg(long = "grid-m")]
    grid_m: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate from `initial_state`; writes trajectory.csv and outcome.txt.
    Simulate(Common),
    /// Label every edge by passivity; writes classification.csv.
    Classify(Common),
    /// Sample the equivalent edge function; writes eqfun.csv.
    Eqfun(Common),
    /// Predict agreement or clustering; writes prediction.txt.
    Predict(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Eqfun(a) => (Command::Eqfun, a),
        Cmd::Predict(a) => (Command::Predict, a),
    };
    let grid = GridArgs {
        half_width: args.grid_n,
        samples: args.grid_m,
    };
    match run(command, &args.config, &args.out, grid) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.error_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

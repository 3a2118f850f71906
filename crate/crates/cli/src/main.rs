use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use skorokhod_cli::{cmd_oracle, cmd_report, cmd_simulate, cmd_solve, cmd_verify, Overrides, Run};
use skorokhod_core::config::{RunConfig, StayPutMode};

/// Optimal stopping of the lattice random walk with subharmonic costs.
#[derive(Parser)]
#[command(name = "skorokhod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the dual and extract the stopping barrier.
    Solve(RunArgs),
    /// Solve the occupation-measure linear program.
    Oracle(RunArgs),
    /// Simulate walks stopped on the barrier of a solved run.
    Simulate(RunArgs),
    /// Check a solved run against an optimal plan.
    Verify(RunArgs),
    /// Summarize the artifacts of a run.
    Report(RunArgs),
    /// Print the configuration of the square-ring benchmark.
    Example,
}

#[derive(Clone, Copy, ValueEnum)]
enum StayPut {
    Auto,
    Always,
    Never,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated paths.
    #[arg(long)]
    paths: Option<u64>,
    /// Dual ascent iteration budget.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
    /// Skip the LP oracle during `solve`.
    #[arg(long)]
    no_oracle: bool,
    #[arg(long, value_enum)]
    stay_put: Option<StayPut>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            paths: self.paths,
            max_iter: self.max_iter,
            h: self.h,
            no_oracle: self.no_oracle,
            stay_put: self.stay_put.map(|m| match m {
                StayPut::Auto => StayPutMode::Auto,
                StayPut::Always => StayPutMode::Always,
                StayPut::Never => StayPutMode::Never,
            }),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, cmd): (&RunArgs, fn(&Run) -> skorokhod_cli::Result<String>) = match &cli.command {
        Command::Solve(a) => (a, cmd_solve),
        Command::Oracle(a) => (a, cmd_oracle),
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Verify(a) => (a, cmd_verify),
        Command::Report(a) => (a, cmd_report),
        Command::Example => {
            let json = RunConfig::square_ring_example().to_json().expect("example serializes");
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{json}");
            return ExitCode::SUCCESS;
        }
    };
    let result = Run::load(&args.config, &args.overrides()).and_then(|run| cmd(&run));
    match result {
        Ok(text) => {
            let _ = write!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

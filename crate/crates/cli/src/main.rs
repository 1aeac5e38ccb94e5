use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hartree_lab::{default_output_dir, report, run, ExperimentConfig, Kind, RunError, RunResult};

#[derive(Parser)]
#[command(name = "hartree-lab", version, about = "Numerical experiments for inhomogeneous Hartree equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel maps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    Admissible(RunArgs),
    GammaWindow(RunArgs),
    Evolve(RunArgs),
    Picard(RunArgs),
    Scaling(RunArgs),
    StrichartzScan(RunArgs),
    SharpnessWeight(RunArgs),
    SharpnessCarrier(RunArgs),
    Ineq(RunArgs),
    /// Summarize a finished run directory.
    Report {
        dir: PathBuf,
    },
}

fn execute(kind: Kind, args: RunArgs) -> RunResult<()> {
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| RunError::Validation(format!("--threads {k}: {e}")))?;
    }
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.kind != kind {
        return Err(RunError::Validation(format!("subcommand {kind} given a config of kind {}", config.kind)));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let dir = args.out.unwrap_or_else(|| default_output_dir(&config));
    run(&config, &dir)?;
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Report { dir } => report(&dir).map(|text| print!("{text}")),
        Command::Admissible(a) => execute(Kind::Admissible, a),
        Command::GammaWindow(a) => execute(Kind::GammaWindow, a),
        Command::Evolve(a) => execute(Kind::Evolve, a),
        Command::Picard(a) => execute(Kind::Picard, a),
        Command::Scaling(a) => execute(Kind::Scaling, a),
        Command::StrichartzScan(a) => execute(Kind::StrichartzScan, a),
        Command::SharpnessWeight(a) => execute(Kind::SharpnessWeight, a),
        Command::SharpnessCarrier(a) => execute(Kind::SharpnessCarrier, a),
        Command::Ineq(a) => execute(Kind::Ineq, a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

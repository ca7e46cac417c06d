use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dispersal_cli::{run_file, Experiment};

#[derive(Parser)]
#[command(name = "dispersal", version, about = "Nonlocal vs local dispersal experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one semilinear problem and write snapshots
    Simulate(Common),
    /// Principal spectrum point of one period map
    Spectrum(Common),
    /// Positive periodic solution of a KPP problem
    KppOrbit(Common),
    /// Solution convergence as delta shrinks
    ConvergeA(Common),
    /// Principal value convergence as delta shrinks
    ConvergeB(Common),
    /// Periodic orbit convergence as delta shrinks
    ConvergeC(Common),
}

#[derive(Args)]
struct Common {
    /// experiment config (key = value lines)
    #[arg(long)]
    config: PathBuf,
    /// output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Simulate(c) => (Experiment::Simulate, c),
        Command::Spectrum(c) => (Experiment::Spectrum, c),
        Command::KppOrbit(c) => (Experiment::KppOrbit, c),
        Command::ConvergeA(c) => (Experiment::ConvergeA, c),
        Command::ConvergeB(c) => (Experiment::ConvergeB, c),
        Command::ConvergeC(c) => (Experiment::ConvergeC, c),
    };
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run_file(experiment, &common.config, &common.out) {
        Ok(summary) => {
            for line in summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bisectnet::experiment;
use bisectnet::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "bisectnet",
    about = "Decentralized noisy-bisection search simulator and diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiments and write aggregate/trace CSV files.
    Run {
        /// Path to a key/value config file (see README for the grammar).
        config: PathBuf,
    },
    /// Run the asynchronous algorithm with full theory diagnostics; exits
    /// nonzero if any hard invariant is violated.
    Diagnose {
        config: PathBuf,
    },
    /// Emit one connected geometric graph as an edge list (`i j` lines)
    /// followed by node coordinates (`i x y` lines).
    Gengraph {
        /// Number of nodes.
        m: usize,
        /// Connection radius over the unit square.
        radius: f64,
        /// Seed; matches graph 0 of an experiment with the same seed.
        seed: u64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    ExperimentConfig::parse(&text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => load_config(&config).and_then(|cfg| {
            experiment::run_experiment(&cfg)
                .map_err(|e| e.to_string())
                .map(|artifacts| {
                    for file in &artifacts.files {
                        println!("wrote {}", file.display());
                    }
                })
        }),
        Command::Diagnose { config } => load_config(&config).and_then(|cfg| {
            experiment::diagnose(&cfg)
                .map_err(|e| e.to_string())
                .map(|artifacts| {
                    for file in &artifacts.files {
                        println!("wrote {}", file.display());
                    }
                    println!("all hard invariants hold");
                })
        }),
        Command::Gengraph { m, radius, seed, out } => experiment::gengraph_text(m, radius, seed)
            .map_err(|e| e.to_string())
            .and_then(|text| match out {
                None => {
                    print!("{text}");
                    Ok(())
                }
                Some(path) => fs::write(&path, text)
                    .map(|_| println!("wrote {}", path.display()))
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

//! `sstree`: generate trees, run verification suites, export mass processes.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "sstree", version, about = "Random trees invariant under random edge contraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit sampled trees: truncation codes, or text for measured trees.
    Gen {
        generator: Generator,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Run a verification suite and report pass or fail.
    Verify {
        suite: Suite,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Mass process on a grid as CSV: t, X, X_c, X_j.
    Massproc {
        generator: MassGenerator,
        #[command(flatten)]
        config: RunConfig,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Generator {
    /// The bare discrete ray.
    Ray,
    /// Ray with a Geo(gamma) star at every spine vertex.
    Bouquet,
    /// Discretized half-line with measure lambda times length.
    Uniform,
    /// Discretized Poisson forest with a comb size measure.
    Forest,
    /// Decoration sampler for the discretized Poisson forest.
    Corollary,
    /// Spine prefix of the Poisson forest as a measured tree.
    ForestRtree,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Suite {
    Selfsim,
    Commute,
    Compat,
    Corollary,
    Coupling,
    Qsd,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MassGenerator {
    Uniform,
    Subordinator,
    Forest,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] sstree::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { generator, config } => config.load_spec().and_then(|c| commands::generate(generator, &c)),
        Command::Verify { suite, config } => config.load_spec().and_then(|c| commands::verify(suite, &c)),
        Command::Massproc { generator, config } => config.load_spec().and_then(|c| commands::massproc(generator, &c)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

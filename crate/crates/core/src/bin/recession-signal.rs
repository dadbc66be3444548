use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use recession_signal::pipeline::{self, PipelineConfig};

/// News-sentiment recession forecasting pipeline.
#[derive(Parser)]
#[command(name = "recession-signal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the monthly news-sentiment index.
    Index(Args),
    /// Extract factors and fit the probit models.
    Fit(Args),
    /// Evaluate fitted models out of sample.
    Evaluate(Args),
    /// Run index, fit and evaluate in sequence.
    All(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides paths.output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for LDA and the bootstrap (overrides the configured seeds).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> recession_signal::Result<()> {
    let (Command::Index(args) | Command::Fit(args) | Command::Evaluate(args) | Command::All(args)) = &cli.command;
    let mut cfg = PipelineConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.paths.output = Some(out.clone());
    }
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    let out = cfg.output_dir().to_path_buf();
    std::fs::create_dir_all(&out).map_err(|e| recession_signal::Error::Config(format!("{}: {e}", out.display())))?;
    match cli.command {
        Command::Index(_) => pipeline::cmd_index(&cfg).map(|_| ()),
        Command::Fit(_) => pipeline::cmd_fit(&cfg),
        Command::Evaluate(_) => pipeline::cmd_evaluate(&cfg),
        Command::All(_) => pipeline::cmd_all(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

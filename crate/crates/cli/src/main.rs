use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use qkrec_cli::commands::{self, VerifyTargets, EXIT_INPUT, EXIT_OK};
use qkrec_cli::{Overrides, PipelineConfig};

/// Recommends quantum-kernel encoding circuits from classical data complexity.
#[derive(Parser)]
#[command(name = "qkrec", version)]
struct Cli {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every manifest dataset and write the meta-dataset
    BuildMeta {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a strategy on the meta-dataset and train the recommender
    Train {
        /// Meta-dataset CSV (default: <output-dir>/meta.csv)
        #[arg(long)]
        meta: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Rank circuits for a dataset from its complexity features alone
    Recommend {
        /// Trained recommender JSON
        #[arg(long)]
        recommender: PathBuf,
        /// CSV with a header, numeric features and a two-valued label column
        #[arg(long)]
        dataset: PathBuf,
        /// Print JSON instead of a table
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare recommendations with simulated ground truth
    Verify {
        /// Trained recommender JSON
        #[arg(long)]
        recommender: PathBuf,
        /// Dataset CSV to verify; repeatable
        #[arg(long = "dataset")]
        datasets: Vec<PathBuf>,
        /// Verify the manifest's holdout datasets
        #[arg(long, conflicts_with = "datasets")]
        holdout: bool,
        /// Simulate only the recommended circuits
        #[arg(long)]
        recommended_only: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check every circuit's structure against the reference table
    AuditCircuits,
}

fn run(cli: Cli) -> Result<i32> {
    let config = cli.config.as_deref();
    let setup = |o: Overrides| -> Result<PipelineConfig> {
        let cfg = PipelineConfig::resolve(config, o)?;
        if cfg.threads > 0 {
            // fails only if a pool already exists, which is harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
        }
        Ok(cfg)
    };
    match cli.command {
        Command::BuildMeta { overrides } => Ok(commands::build_meta(&setup(overrides)?)?.1),
        Command::Train { meta, overrides } => {
            commands::train(&setup(overrides)?, meta.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Recommend {
            recommender,
            dataset,
            json,
            overrides,
        } => {
            commands::recommend(&setup(overrides)?, &recommender, &dataset, json)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            recommender,
            datasets,
            holdout,
            recommended_only,
            overrides,
        } => {
            let targets = if holdout {
                VerifyTargets::Holdout
            } else {
                VerifyTargets::Files(&datasets)
            };
            commands::verify(&setup(overrides)?, &recommender, targets, recommended_only)?;
            Ok(EXIT_OK)
        }
        Command::AuditCircuits => Ok(if commands::audit_circuits() { EXIT_OK } else { EXIT_INPUT }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    };
    ExitCode::from(code as u8)
}

//! Command-line driver for the scattering reconstruction experiments.

mod config;
mod experiment;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Algorithm, ExperimentConfig};
use experiment::{print_path_summary, RunError};

#[derive(Parser)]
#[command(name = "scatterkit", version, about = "Inverse medium scattering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by all subcommands; any flag set here overrides the
/// corresponding config field.
#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the noise RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the effective configuration and exit without running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate noisy far-field data without running an inversion.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Run one reconstruction experiment end to end.
    Invert {
        #[command(flatten)]
        common: Common,
        /// Override the reconstruction algorithm.
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Override the contrast sparsity weight β.
        #[arg(long)]
        beta: Option<f64>,
        /// Override the source sparsity weight γ.
        #[arg(long)]
        gamma: Option<f64>,
        /// Override the iteration cap.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Run the experiment once per β value and summarize.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated β values, e.g. `0,1e-6,1e-5,1e-4,1e-3`.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        /// Override the reconstruction algorithm.
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Override the iteration cap.
        #[arg(long)]
        max_iters: Option<usize>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn print_config(cfg: &ExperimentConfig) {
    println!(
        "{}",
        serde_json::to_string_pretty(cfg).expect("config serializes")
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { common } => match load(&common) {
            Err(e) => Err(RunError::Usage(e)),
            Ok(cfg) if common.print_config => {
                print_config(&cfg);
                Ok(())
            }
            Ok(cfg) => experiment::synth(&cfg),
        },
        Command::Invert {
            common,
            algorithm,
            beta,
            gamma,
            max_iters,
        } => match load(&common) {
            Err(e) => Err(RunError::Usage(e)),
            Ok(mut cfg) => {
                if let Some(a) = algorithm {
                    cfg.algorithm = a;
                }
                if let Some(b) = beta {
                    cfg.beta = b;
                }
                if gamma.is_some() {
                    cfg.gamma = gamma;
                }
                if let Some(n) = max_iters {
                    cfg.max_iters = n;
                }
                if common.print_config {
                    print_config(&cfg);
                    Ok(())
                } else {
                    experiment::run_experiment(&cfg).map(|man| {
                        print_path_summary(&man, &cfg.output_dir);
                    })
                }
            }
        },
        Command::Sweep {
            common,
            betas,
            algorithm,
            max_iters,
        } => match load(&common) {
            Err(e) => Err(RunError::Usage(e)),
            Ok(mut cfg) => {
                if let Some(a) = algorithm {
                    cfg.algorithm = a;
                }
                if let Some(n) = max_iters {
                    cfg.max_iters = n;
                }
                if common.print_config {
                    print_config(&cfg);
                    Ok(())
                } else {
                    experiment::sweep(&cfg, &betas).and_then(|failures| {
                        println!(
                            "sweep finished: {}/{} runs succeeded -> {}",
                            betas.len() - failures,
                            betas.len(),
                            cfg.output_dir.display()
                        );
                        if failures == 0 {
                            Ok(())
                        } else {
                            Err(RunError::Run(format!("{failures} sweep runs failed")))
                        }
                    })
                }
            }
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        Err(RunError::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

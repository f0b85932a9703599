//! Experiment drivers behind the `adqc-sim` binary.
//!
//! Each experiment reads a TOML config (`experiment`, `seed`, `out`, `engine`, `[params]`),
//! validates it completely, then writes delimited series and JSON results into the output
//! directory. Every file starts with the artifact version and the SHA-256 of the resolved
//! config, so identical configs give byte-identical files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::fs;
use std::path::PathBuf;

use clap::Parser;
use log::info;

pub use config::{Engine, Experiment, ExperimentConfig, ExperimentParams};
pub use error::CliError;
pub use output::OutputDir;

#[derive(Debug, Clone, Parser)]
#[command(name = "adqc-sim", version, about = "Desk-scale analog-digital quantum dynamics experiments")]
pub struct Cli {
    pub experiment: Experiment,
    /// TOML config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and ensembles.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub engine: Option<Engine>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

/// What a run produced: the output directory and the driver's summary.
#[derive(Debug, Clone)]
pub enum Outcome {
    Printed(String),
    Ran { out: PathBuf, summary: serde_json::Value },
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.experiment {
        Experiment::Larmor => run_typed::<experiments::larmor::Params>(cli),
        Experiment::Exchange => run_typed::<experiments::exchange::Params>(cli),
        Experiment::Chain => run_typed::<experiments::chain::Params>(cli),
        Experiment::Anderson => run_typed::<experiments::anderson::Params>(cli),
        Experiment::Detection => run_typed::<experiments::detection::Params>(cli),
        Experiment::RwaCheck => run_typed::<experiments::rwa::Params>(cli),
        Experiment::Fit => run_typed::<experiments::fit::Params>(cli),
    }
}

/// Config file (or defaults) with command-line overrides applied, validated.
pub fn resolve<P: ExperimentParams>(cli: &Cli) -> Result<ExperimentConfig<P>, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            config::parse::<P>(&text)?
        }
        None => ExperimentConfig::<P>::defaults(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(engine) = cli.engine {
        cfg.engine = Some(engine);
    }
    cfg.engine = Some(cfg.engine());
    config::validate(&cfg)?;
    Ok(cfg)
}

fn run_typed<P: ExperimentParams>(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve::<P>(cli)?;
    if cli.print_config {
        return Ok(Outcome::Printed(cfg.canonical_toml()?));
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(P::KIND.to_string()));
    let out = OutputDir::create(&dir, &cfg.sha256()?)?;
    out.text("config.toml", &cfg.canonical_toml()?)?;
    let work = || P::run(&cfg, &out);
    let summary = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    info!("{} finished; results in {}", P::KIND, dir.display());
    Ok(Outcome::Ran { out: dir, summary })
}

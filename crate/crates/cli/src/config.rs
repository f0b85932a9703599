use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Larmor,
    Exchange,
    Chain,
    Anderson,
    Detection,
    RwaCheck,
    Fit,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Magnon,
    Fermion,
    Lindblad,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// One experiment run: shared keys plus a `[params]` table owned by the driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig<P> {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(default)]
    pub params: P,
}

impl<P: ExperimentParams> ExperimentConfig<P> {
    pub fn defaults() -> Self {
        Self { experiment: P::KIND, seed: 0, out: None, engine: Some(P::ENGINES[0]), params: P::default() }
    }

    pub fn engine(&self) -> Engine {
        self.engine.unwrap_or(P::ENGINES[0])
    }

    /// TOML of everything that determines the data; the output directory is left out.
    pub fn canonical_toml(&self) -> Result<String, CliError> {
        let mut c = self.clone();
        c.out = None;
        c.engine = Some(self.engine());
        toml::to_string(&c).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }

    pub fn sha256(&self) -> Result<String, CliError> {
        let digest = Sha256::digest(self.canonical_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Driver-specific parameter block.
pub trait ExperimentParams: Default + Clone + Send + Sync + Serialize + DeserializeOwned {
    const KIND: Experiment;
    /// Supported engines, default first.
    const ENGINES: &'static [Engine];

    fn validate(&self, engine: Engine) -> Result<(), CliError>;

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError>;
}

pub fn parse<P: ExperimentParams>(text: &str) -> Result<ExperimentConfig<P>, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Schema checks shared by all experiments, then the driver's own.
pub fn validate<P: ExperimentParams>(config: &ExperimentConfig<P>) -> Result<(), CliError> {
    if config.experiment != P::KIND {
        return Err(CliError::Config(format!(
            "config is for experiment '{}', not '{}'",
            config.experiment,
            P::KIND
        )));
    }
    let engine = config.engine();
    if !P::ENGINES.contains(&engine) {
        let ok: Vec<String> = P::ENGINES.iter().map(|e| e.to_string()).collect();
        return Err(CliError::Config(format!(
            "engine '{engine}' cannot run '{}' (supported: {})",
            P::KIND,
            ok.join(", ")
        )));
    }
    config.params.validate(engine)
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

/// Uniform grid start, start + step, … up to `end` inclusive (within rounding).
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    if end <= start {
        return vec![start];
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

pub(crate) fn check_grid(name: &str, start: f64, end: f64, step: f64) -> Result<(), CliError> {
    require(start.is_finite() && end.is_finite() && start >= 0.0, || {
        format!("{name}: start and end must be finite and non-negative")
    })?;
    require(end >= start, || format!("{name}: end {end} precedes start {start}"))?;
    require(step > 0.0 && step.is_finite(), || format!("{name}: step must be positive"))?;
    require((end - start) / step <= 1e6, || format!("{name}: more than 10^6 samples"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(0.0, 30.0, 0.1);
        assert_eq!(g.len(), 301);
        assert!((g[300] - 30.0).abs() < 1e-12);
        assert_eq!(uniform_grid(2.0, 2.0, 0.1), vec![2.0]);
    }
}

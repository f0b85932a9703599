//! Fits trajectories written by the larmor and exchange experiments (or any file in that layout).

use std::path::{Path, PathBuf};

use adqc_core::fit::{fit_exchange, fit_larmor, ExchangeInit, ExchangeSeries, LarmorFitSpec, LarmorParam, LarmorParams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{require, Engine, Experiment, ExperimentConfig, ExperimentParams};
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Larmor,
    Exchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub input: PathBuf,
    pub model: FitModel,
    /// Larmor: the magnetization column to fit.
    pub column: String,
    pub free: Vec<LarmorParam>,
    pub init: LarmorParams,
    pub window: (f64, f64),
    pub multistart: bool,
    pub t0: f64,
    pub exchange_init: ExchangeInit,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            input: PathBuf::from("larmor_series.csv"),
            model: FitModel::Larmor,
            column: "detector_x".into(),
            free: vec![LarmorParam::ThetaD, LarmorParam::PhiD],
            init: LarmorParams {
                delta: 1.0,
                t1: 32.0,
                t2: adqc_core::NoiseParams { t1: 32.0, t_phi: 12.0 }.t2(),
                theta_s: std::f64::consts::FRAC_PI_2,
                phi_s: 0.0,
                theta_d: std::f64::consts::FRAC_PI_2,
                phi_d: 0.0,
            },
            window: adqc_core::fit::DEFAULT_WINDOW_NS,
            multistart: true,
            t0: 0.0,
            exchange_init: ExchangeInit::default(),
        }
    }
}

/// Columns of a delimited series file; `#` lines are skipped.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let idx = names
        .iter()
        .map(|n| headers.iter().position(|h| h == *n).ok_or_else(|| bad(format!("no column '{n}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        for (c, &i) in idx.iter().enumerate() {
            let field = rec.get(i).ok_or_else(|| bad(format!("record {} is short", line + 1)))?;
            cols[c].push(field.parse::<f64>().map_err(|e| bad(format!("record {}: {e}", line + 1)))?);
        }
    }
    Ok(cols)
}

impl ExperimentParams for Params {
    const KIND: Experiment = Experiment::Fit;
    const ENGINES: &'static [Engine] = &[Engine::Lindblad];

    fn validate(&self, _engine: Engine) -> Result<(), CliError> {
        require(self.input.is_file(), || format!("input {} is not a file", self.input.display()))?;
        match self.model {
            FitModel::Larmor => {
                require(!self.free.is_empty(), || "free must list at least one parameter".into())?;
                require(self.window.0 <= self.window.1, || "window must be ordered".into())
            }
            FitModel::Exchange => require(self.exchange_init.t1 > 0.0 && self.exchange_init.t_phi > 0.0, || {
                "exchange_init times must be positive".into()
            }),
        }
    }

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError> {
        let p = &config.params;
        let result = match p.model {
            FitModel::Larmor => {
                let cols = read_columns(&p.input, &["t_ns", &p.column])?;
                let spec = LarmorFitSpec { free: p.free.clone(), init: p.init, window: p.window, multistart: p.multistart, t0: p.t0 };
                fit_larmor(&cols[0], &cols[1], &spec)?
            }
            FitModel::Exchange => {
                let mut cols = read_columns(&p.input, &["t_ns", "sz1", "sz2", "szsz"])?.into_iter();
                let mut next = || cols.next().unwrap_or_default();
                let series = ExchangeSeries { t: next(), sz1: next(), sz2: next(), szsz: next() };
                fit_exchange(&series, p.exchange_init)?
            }
        };
        let doc = json!({ "input": p.input, "model": p.model, "result": result });
        out.json("fit_result.json", &doc)?;
        Ok(doc)
    }
}

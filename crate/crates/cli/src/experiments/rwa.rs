//! Rotating-wave check: full TFIM vs effective XY model on small random chains.

use adqc_core::exact::{self, rwa_error};
use adqc_core::EffectiveXYModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{require, Engine, Experiment, ExperimentConfig, ExperimentParams};
use crate::error::CliError;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub cases: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Base gap; each case is also run at twice this value.
    pub delta: f64,
    /// Bond magnitudes are drawn from this range, with random signs.
    pub coupling_range: (f64, f64),
    pub detuning_max: f64,
    /// Evolution to 𝒥·t = jt_max, identical for both gaps.
    pub jt_max: f64,
    pub samples: usize,
    /// Smallest acceptable error reduction when the gap doubles.
    pub min_ratio: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            cases: 10,
            min_length: 2,
            max_length: 6,
            delta: 2.0,
            coupling_range: (0.1, 0.3),
            detuning_max: 0.1,
            jt_max: 2.0,
            samples: 201,
            min_ratio: 1.8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Case {
    case: usize,
    length: usize,
    site: usize,
    coupling_scale: f64,
    error_delta: f64,
    error_double: f64,
    ratio: f64,
}

fn run_case(p: &Params, seed: u64, case: usize) -> Result<Case, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    let length = rng.random_range(p.min_length..=p.max_length);
    let couplings: Vec<f64> = (0..length - 1)
        .map(|_| {
            let g = rng.random_range(p.coupling_range.0..=p.coupling_range.1);
            if rng.random_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect();
    let detunings: Vec<f64> = (0..length).map(|_| rng.random_range(-p.detuning_max..=p.detuning_max)).collect();
    let site = rng.random_range(0..length);
    let scale = couplings.iter().map(|g| g.abs()).sum::<f64>() / couplings.len() as f64;
    let t: Vec<f64> = (0..p.samples).map(|k| p.jt_max / scale * k as f64 / (p.samples - 1) as f64).collect();
    // |+⟩ on one site mixes excitation-number sectors, so counter-rotating terms matter.
    let psi0 = exact::plus_state(length, site)?;
    let error_at = |delta: f64| -> Result<f64, CliError> {
        let model = EffectiveXYModel::new(delta, detunings.clone(), couplings.clone(), false)?;
        Ok(rwa_error(&model, &psi0, &t)?)
    };
    let error_delta = error_at(p.delta)?;
    let error_double = error_at(2.0 * p.delta)?;
    Ok(Case {
        case,
        length,
        site,
        coupling_scale: scale,
        error_delta,
        error_double,
        ratio: error_delta / error_double,
    })
}

impl ExperimentParams for Params {
    const KIND: Experiment = Experiment::RwaCheck;
    const ENGINES: &'static [Engine] = &[Engine::Exact];

    fn validate(&self, _engine: Engine) -> Result<(), CliError> {
        require(self.cases >= 1, || "at least one case is required".into())?;
        require(2 <= self.min_length && self.min_length <= self.max_length, || {
            "lengths must satisfy 2 <= min_length <= max_length".into()
        })?;
        require(self.max_length <= exact::MAX_RWA_SITES, || {
            format!("max_length is limited to {}", exact::MAX_RWA_SITES)
        })?;
        require(self.delta > 0.0 && self.delta.is_finite(), || "delta must be positive".into())?;
        let (lo, hi) = self.coupling_range;
        require(0.0 < lo && lo <= hi && hi < self.delta, || "coupling_range must satisfy 0 < lo <= hi < delta".into())?;
        require(self.detuning_max >= 0.0 && self.detuning_max < self.delta, || "detuning_max must be in [0, delta)".into())?;
        require(self.jt_max > 0.0 && self.jt_max.is_finite(), || "jt_max must be positive".into())?;
        require(self.samples >= 2, || "at least 2 samples are required".into())?;
        require(self.min_ratio > 0.0, || "min_ratio must be positive".into())
    }

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError> {
        let p = &config.params;
        let cases: Vec<Case> = (0..p.cases)
            .into_par_iter()
            .map(|c| run_case(p, config.seed, c))
            .collect::<Result<_, _>>()?;
        out.csv(
            "rwa_check.csv",
            &["case", "length", "site", "coupling_scale", "error_delta", "error_2delta", "ratio"],
            cases.iter().map(|c| {
                [
                    c.case.to_string(),
                    c.length.to_string(),
                    c.site.to_string(),
                    num(c.coupling_scale),
                    num(c.error_delta),
                    num(c.error_double),
                    num(c.ratio),
                ]
            }),
        )?;
        let worst = cases.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
        let passed = cases.iter().all(|c| c.ratio >= p.min_ratio);
        let result = json!({ "delta": p.delta, "min_ratio": worst, "threshold": p.min_ratio, "passed": passed, "cases": cases });
        out.json("rwa_check.json", &result)?;
        if !passed {
            return Err(CliError::Numerical(format!(
                "doubling the gap reduced the RWA error by only {worst:.3}x (threshold {})",
                p.min_ratio
            )));
        }
        Ok(result)
    }
}

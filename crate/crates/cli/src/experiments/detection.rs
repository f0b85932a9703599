//! Detector quench: single-pair readout axis and the two-target crosstalk sweep.

use std::fs;
use std::path::PathBuf;

use adqc_core::detection::{quench_readout_axis, two_target_fidelity, QuenchSpec, TwoTargetFidelity};
use adqc_core::AnnealSchedule;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{require, Engine, Experiment, ExperimentConfig, ExperimentParams};
use crate::error::CliError;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// `s, A, B` table; the bundled synthetic schedule when absent.
    pub schedule: Option<PathBuf>,
    /// Quench shape; defaults to the target parked at A(s) = 2 GHz.
    pub quench: Option<QuenchSpec>,
    /// Target–target couplings 𝒥_tt in GHz.
    pub couplings: Vec<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self { schedule: None, quench: None, couplings: (0..=8).map(|k| k as f64 / 20.0).collect() }
    }
}

impl Params {
    fn schedule(&self) -> Result<AnnealSchedule, CliError> {
        match &self.schedule {
            None => Ok(AnnealSchedule::default_synthetic()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                AnnealSchedule::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }

    fn quench(&self, schedule: &AnnealSchedule) -> Result<QuenchSpec, CliError> {
        match &self.quench {
            Some(q) => Ok(q.clone()),
            None => QuenchSpec::default_for(schedule).map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

impl ExperimentParams for Params {
    const KIND: Experiment = Experiment::Detection;
    const ENGINES: &'static [Engine] = &[Engine::Exact];

    fn validate(&self, _engine: Engine) -> Result<(), CliError> {
        let schedule = self.schedule()?;
        let q = self.quench(&schedule)?;
        require(q.ramp_ns > 0.0 && q.hold_ns >= 0.0, || "quench ramp must be positive and hold non-negative".into())?;
        require(q.duration() <= 100.0, || "quench longer than 100 ns".into())?;
        let (lo, hi) = schedule.domain();
        require(q.s_target >= lo && q.s_target <= hi, || format!("s_target {} outside the schedule", q.s_target))?;
        require(!self.couplings.is_empty(), || "at least one coupling is required".into())?;
        require(self.couplings.iter().all(|j| j.is_finite() && *j >= 0.0), || {
            "couplings must be finite and non-negative".into()
        })
    }

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError> {
        let p = &config.params;
        let schedule = p.schedule()?;
        let quench = p.quench(&schedule)?;
        let single = quench_readout_axis(&schedule, &quench)?;
        let sweep: Vec<TwoTargetFidelity> = p
            .couplings
            .par_iter()
            .map(|&j| two_target_fidelity(&schedule, &quench, j))
            .collect::<Result<_, _>>()?;
        out.csv(
            "detection_sweep.csv",
            &["coupling_ghz", "theta", "phi", "F_local", "F_nonlocal"],
            sweep.iter().map(|f| {
                [num(f.target_coupling), num(f.axis.theta), num(f.axis.phi), num(f.local), num(f.nonlocal)]
            }),
        )?;
        let mut order: Vec<&TwoTargetFidelity> = sweep.iter().collect();
        order.sort_by(|a, b| a.target_coupling.total_cmp(&b.target_coupling));
        let monotone = order.windows(2).all(|w| w[1].local <= w[0].local + 1e-12);
        let gap = |f: &TwoTargetFidelity| f.nonlocal - f.local;
        let gap_growing = order.windows(2).all(|w| gap(w[1]) >= gap(w[0]) - 1e-12);
        let result = json!({
            "quench": quench,
            "single_pair_axis": single,
            "local_non_increasing": monotone,
            "nonlocal_dominates": sweep.iter().all(|f| f.nonlocal >= f.local - 1e-12),
            "gap_non_decreasing": gap_growing,
            "sweep": sweep,
        });
        out.json("detection_result.json", &result)?;
        Ok(result)
    }
}

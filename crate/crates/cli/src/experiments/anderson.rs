//! Disorder-averaged imbalance of the staggered state.

use adqc_core::exact::{self, build_tfim_parts, Propagator};
use adqc_core::fermion::{
    disorder_realization, fit_quadratic_scaling, imbalance_value, late_imbalance, run_ensemble, small_w_grid,
    staggered_sites, BdGSystem, ImbalanceSeries, LateImbalance, ScalingFit, DEFAULT_W_SET, LATE_WINDOW_NS,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{check_grid, require, uniform_grid, Engine, Experiment, ExperimentConfig, ExperimentParams};
use crate::error::CliError;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub delta: f64,
    pub coupling: f64,
    pub length: usize,
    pub disorder: Vec<f64>,
    pub realizations: usize,
    pub t_end: f64,
    pub dt: f64,
    pub late_window: (f64, f64),
    /// Extra small-W points for the power-law fit; empty disables it.
    pub scaling_disorder: Vec<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta: 2.0,
            coupling: 0.2,
            length: 124,
            disorder: DEFAULT_W_SET.to_vec(),
            realizations: 400,
            t_end: 20.0,
            dt: 0.1,
            late_window: LATE_WINDOW_NS,
            scaling_disorder: small_w_grid(),
        }
    }
}

impl Params {
    fn template(&self) -> Result<BdGSystem, CliError> {
        Ok(BdGSystem::clean(self.length, self.delta, self.coupling)?)
    }
}

fn exact_ensemble(template: &BdGSystem, w: f64, n: usize, seed: u64, t: &[f64]) -> Result<Vec<ImbalanceSeries>, CliError> {
    let l = template.len();
    let bonds: Vec<(usize, usize, f64)> = template.couplings.iter().enumerate().map(|(i, &g)| (i, (i + 1) % l, g)).collect();
    let psi0 = exact::basis_state(l, &staggered_sites(l))?;
    (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let system = disorder_realization(template, w, seed, r);
            let prop = Propagator::new(&build_tfim_parts(&system.site_energies, &bonds)?);
            let values = prop
                .trajectory(&psi0, t)?
                .iter()
                .map(|psi| imbalance_value(&exact::lab_tau_x(psi)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ImbalanceSeries { t_grid: t.to_vec(), values, disorder: w, seed, realization: r })
        })
        .collect()
}

impl ExperimentParams for Params {
    const KIND: Experiment = Experiment::Anderson;
    const ENGINES: &'static [Engine] = &[Engine::Fermion, Engine::Exact];

    fn validate(&self, engine: Engine) -> Result<(), CliError> {
        require(self.delta > 0.0 && self.delta.is_finite(), || format!("delta = {} must be positive", self.delta))?;
        require(self.coupling.is_finite() && self.coupling != 0.0, || "coupling must be finite and nonzero".into())?;
        require(self.length >= 2 && self.length.is_multiple_of(2), || "length must be even and at least 2".into())?;
        require(!self.disorder.is_empty(), || "at least one disorder strength is required".into())?;
        require(self.disorder.iter().chain(&self.scaling_disorder).all(|w| *w >= 0.0 && w.is_finite()), || {
            "disorder strengths must be finite and non-negative".into()
        })?;
        require(self.realizations >= 2, || "at least 2 realizations are required".into())?;
        check_grid("time grid", 0.0, self.t_end, self.dt)?;
        let (a, b) = self.late_window;
        require(0.0 <= a && a <= b && b <= self.t_end, || format!("late_window ({a}, {b}) must lie inside [0, t_end]"))?;
        if engine == Engine::Exact {
            require(self.length <= exact::MAX_SITES, || format!("exact engine is limited to {} sites", exact::MAX_SITES))?;
        }
        Ok(())
    }

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError> {
        let p = &config.params;
        let template = p.template()?;
        let t = uniform_grid(0.0, p.t_end, p.dt);
        let (a, b) = p.late_window;
        // scaling points are only ever averaged over the late window
        let t_late: Vec<f64> = t.iter().copied().filter(|&tk| tk >= a - 1e-9 && tk <= b + 1e-9).collect();
        let ensemble = |w: f64, t: &[f64]| -> Result<Vec<ImbalanceSeries>, CliError> {
            match config.engine() {
                Engine::Exact => exact_ensemble(&template, w, p.realizations, config.seed, t),
                _ => Ok(run_ensemble(&template, w, p.realizations, config.seed, t)?),
            }
        };
        let mut summary: Vec<LateImbalance> = Vec::new();
        for &w in &p.disorder {
            let series = ensemble(w, &t)?;
            out.csv(
                &format!("anderson_W{}.csv", num(w)),
                &["W", "realization", "t_ns", "I"],
                series.iter().flat_map(|s| {
                    s.t_grid
                        .iter()
                        .zip(&s.values)
                        .map(move |(&tk, &v)| [num(w), s.realization.to_string(), num(tk), num(v)])
                }),
            )?;
            let late = late_imbalance(&series, a, b)?;
            info!("W = {w}: Ĩ = {:.4} ± {:.4}", late.mean, late.stderr);
            summary.push(late);
        }
        out.csv(
            "anderson_summary.csv",
            &["W", "I_mean", "I_stderr"],
            summary.iter().map(|l| [num(l.disorder), num(l.mean), num(l.stderr)]),
        )?;

        let mut scaling_points: Vec<LateImbalance> = Vec::new();
        let mut scaling: Option<ScalingFit> = None;
        let mut scaling_note = None;
        if !p.scaling_disorder.is_empty() {
            for &w in &p.scaling_disorder {
                scaling_points.push(late_imbalance(&ensemble(w, &t_late)?, a, b)?);
            }
            let ws: Vec<f64> = scaling_points.iter().map(|l| l.disorder).collect();
            let means: Vec<f64> = scaling_points.iter().map(|l| l.mean).collect();
            match fit_quadratic_scaling(&ws, &means) {
                Ok(f) => scaling = Some(f),
                Err(e) => {
                    warn!("small-W fit skipped ({e})");
                    scaling_note = Some(e.to_string());
                }
            }
            out.csv(
                "anderson_scaling.csv",
                &["W", "I_mean", "I_stderr"],
                scaling_points.iter().map(|l| [num(l.disorder), num(l.mean), num(l.stderr)]),
            )?;
        }
        let result = json!({
            "engine": config.engine(),
            "late_window_ns": p.late_window,
            "summary": summary,
            "scaling_fit": scaling,
            "scaling_note": scaling_note,
        });
        out.json("anderson_result.json", &result)?;
        Ok(result)
    }
}

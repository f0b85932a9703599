//! Single-qubit Larmor precession panels with per-panel angle fits.

use std::f64::consts::PI;

use adqc_core::fit::{add_gaussian_noise, fit_larmor, median_bootstrap, FitResult, LarmorFitSpec, LarmorParam, LarmorParams};
use adqc_core::lindblad::{larmor_magnetization, BlochAxis, NoiseParams};
use adqc_core::Error;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{check_grid, require, uniform_grid, Engine, Experiment, ExperimentConfig, ExperimentParams};
use crate::error::CliError;
use crate::output::{num, OutputDir};

const BOOTSTRAP_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Panel {
    pub name: String,
    pub theta_s: f64,
    pub phi_s: f64,
    pub theta_d: f64,
    pub phi_d: f64,
    /// Parameters fitted for this panel; the rest stay at their configured values.
    pub free: Vec<LarmorParam>,
}

impl Panel {
    fn detector(name: &str, theta_d: f64) -> Self {
        Self {
            name: name.into(),
            theta_s: PI / 2.0,
            phi_s: 0.0,
            theta_d,
            phi_d: 0.0,
            free: vec![LarmorParam::ThetaD, LarmorParam::PhiD],
        }
    }

    fn source(name: &str, theta_s: f64) -> Self {
        Self {
            name: name.into(),
            theta_s,
            phi_s: 0.0,
            // Tilted: on the equator the model only sees sin θs.
            theta_d: PI / 4.0,
            phi_d: 0.0,
            free: vec![LarmorParam::ThetaS, LarmorParam::PhiS],
        }
    }
}

/// Top row tilts the detector from x to z, bottom row tilts the source from |+⟩ to |1⟩.
pub fn default_panels() -> Vec<Panel> {
    vec![
        Panel::detector("detector_x", PI / 2.0),
        Panel::detector("detector_mid", PI / 4.0),
        Panel::detector("detector_z", 0.0),
        Panel::source("source_plus", PI / 2.0),
        Panel::source("source_mid", 3.0 * PI / 4.0),
        Panel::source("source_one", PI),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub delta: f64,
    pub t1: f64,
    pub t_phi: f64,
    /// Initialization time; the model is evaluated for t ≥ t0.
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Gaussian readout noise added to each panel (0 disables).
    pub noise_sigma: f64,
    pub fit: bool,
    pub fit_window: (f64, f64),
    /// Independent noise draws fitted per panel; above 1, fitted angles are summarized
    /// by their median with a 95% bootstrap interval.
    pub trials: usize,
    pub panels: Vec<Panel>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta: 1.0,
            t1: 32.0,
            t_phi: 12.0,
            t0: 0.0,
            t_end: 30.0,
            dt: 0.1,
            noise_sigma: 0.0,
            fit: true,
            fit_window: adqc_core::fit::DEFAULT_WINDOW_NS,
            trials: 1,
            panels: default_panels(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct PanelFit {
    panel: String,
    configured: LarmorParams,
    fit: Option<FitResult>,
    note: Option<String>,
}

impl Params {
    fn noise(&self) -> Result<NoiseParams, CliError> {
        NoiseParams::new(self.t1, self.t_phi).map_err(|e| CliError::Config(e.to_string()))
    }

    fn truth(&self, p: &Panel) -> LarmorParams {
        LarmorParams {
            delta: self.delta,
            t1: self.t1,
            t2: NoiseParams { t1: self.t1, t_phi: self.t_phi }.t2(),
            theta_s: p.theta_s,
            phi_s: p.phi_s,
            theta_d: p.theta_d,
            phi_d: p.phi_d,
        }
    }
}

/// Start the free angles from the unbiased |+⟩/x guess; multi-start covers reflections.
fn initial_guess(truth: LarmorParams, free: &[LarmorParam]) -> LarmorParams {
    let mut init = truth;
    for p in free {
        match p {
            LarmorParam::ThetaS => init.theta_s = PI / 2.0,
            LarmorParam::PhiS => init.phi_s = 0.0,
            LarmorParam::ThetaD => init.theta_d = PI / 2.0,
            LarmorParam::PhiD => init.phi_d = 0.0,
            LarmorParam::Delta => init.delta = truth.delta * 1.01,
            LarmorParam::T1 => init.t1 = truth.t1 * 1.2,
            LarmorParam::T2 => init.t2 = truth.t2 * 1.2,
        }
    }
    init
}

fn fit_panel(t: &[f64], m: &[f64], panel: &Panel, truth: LarmorParams, p: &Params) -> PanelFit {
    let mut free = panel.free.clone();
    let mut spec = LarmorFitSpec::new(free.clone(), initial_guess(truth, &free));
    spec.window = p.fit_window;
    spec.t0 = p.t0;
    let mut result = fit_larmor(t, m, &spec);
    // At θ = 0 or π the azimuth drops out of the model; retry without it.
    if matches!(result, Err(Error::DegenerateFit(_))) {
        free.retain(|q| !matches!(q, LarmorParam::PhiS | LarmorParam::PhiD));
        if !free.is_empty() {
            spec.free = free;
            result = fit_larmor(t, m, &spec);
        }
    }
    match result {
        Ok(fit) => PanelFit { panel: panel.name.clone(), configured: truth, fit: Some(fit), note: None },
        Err(e) => {
            warn!("panel {}: fit skipped ({e})", panel.name);
            PanelFit { panel: panel.name.clone(), configured: truth, fit: None, note: Some(e.to_string()) }
        }
    }
}

impl ExperimentParams for Params {
    const KIND: Experiment = Experiment::Larmor;
    const ENGINES: &'static [Engine] = &[Engine::Lindblad];

    fn validate(&self, _engine: Engine) -> Result<(), CliError> {
        require(self.delta > 0.0 && self.delta.is_finite(), || format!("delta = {} must be positive", self.delta))?;
        self.noise()?;
        check_grid("time grid", self.t0, self.t_end, self.dt)?;
        require(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite(), || {
            "noise_sigma must be non-negative".into()
        })?;
        require(self.fit_window.0 <= self.fit_window.1, || "fit_window must be ordered".into())?;
        require(!self.panels.is_empty(), || "at least one panel is required".into())?;
        require(self.trials >= 1, || "trials must be at least 1".into())?;
        require(self.trials == 1 || (self.fit && self.noise_sigma > 0.0), || {
            "trials > 1 needs fit = true and noise_sigma > 0".into()
        })?;
        for (i, p) in self.panels.iter().enumerate() {
            require(!p.name.is_empty() && p.name != "t_ns", || format!("panel {i} needs a name other than t_ns"))?;
            require(self.panels[..i].iter().all(|q| q.name != p.name), || format!("duplicate panel '{}'", p.name))?;
            BlochAxis::new(p.theta_s, p.phi_s).map_err(|e| CliError::Config(format!("panel {}: {e}", p.name)))?;
            BlochAxis::new(p.theta_d, p.phi_d).map_err(|e| CliError::Config(format!("panel {}: {e}", p.name)))?;
        }
        Ok(())
    }

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError> {
        let p = &config.params;
        let noise = p.noise()?;
        let t = uniform_grid(p.t0, p.t_end, p.dt);
        let clean = p
            .panels
            .iter()
            .map(|panel| {
                let source = BlochAxis::new(panel.theta_s, panel.phi_s)?;
                let detector = BlochAxis::new(panel.theta_d, panel.phi_d)?;
                t.iter()
                    .map(|&t| larmor_magnetization(source, detector, p.delta, noise, t, p.t0))
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        // Trial r of panel i draws from stream r·panels + i; trial 0 is the emitted series.
        let noisy = |i: usize, trial: usize| -> Result<Vec<f64>, CliError> {
            let mut m = clean[i].clone();
            if p.noise_sigma > 0.0 {
                add_gaussian_noise(&mut m, p.noise_sigma, config.seed, (trial * p.panels.len() + i) as u64)?;
            }
            Ok(m)
        };
        let series = (0..p.panels.len()).map(|i| noisy(i, 0)).collect::<Result<Vec<_>, _>>()?;
        let mut columns = vec!["t_ns"];
        columns.extend(p.panels.iter().map(|q| q.name.as_str()));
        out.csv(
            "larmor_series.csv",
            &columns,
            t.iter().enumerate().map(|(k, &tk)| {
                std::iter::once(num(tk)).chain(series.iter().map(move |s| num(s[k]))).collect::<Vec<_>>()
            }),
        )?;

        let fits: Vec<PanelFit> = if p.fit && t.len() > 1 {
            p.panels
                .par_iter()
                .zip(series.par_iter())
                .map(|(panel, m)| fit_panel(&t, m, panel, p.truth(panel), p))
                .collect()
        } else {
            if p.fit {
                warn!("single time point: fits skipped");
            }
            Vec::new()
        };
        out.json("larmor_fits.json", &fits)?;
        let worst_theta = fits
            .iter()
            .filter_map(|f| {
                let fit = f.fit.as_ref()?;
                let d = fit.value("theta_d").map(|v| (v - f.configured.theta_d).abs());
                let s = fit.value("theta_s").map(|v| (v - f.configured.theta_s).abs());
                d.into_iter().chain(s).reduce(f64::max)
            })
            .fold(0.0, f64::max);

        let mut medians = Vec::new();
        if p.trials > 1 && t.len() > 1 {
            let jobs: Vec<(usize, usize)> = (0..p.panels.len()).flat_map(|i| (0..p.trials).map(move |r| (i, r))).collect();
            let trial_fits = jobs
                .par_iter()
                .map(|&(i, r)| {
                    let panel = &p.panels[i];
                    Ok(fit_panel(&t, &noisy(i, r)?, panel, p.truth(panel), p).fit)
                })
                .collect::<Result<Vec<Option<FitResult>>, CliError>>()?;
            for (i, panel) in p.panels.iter().enumerate() {
                let fits: Vec<&FitResult> = trial_fits[i * p.trials..(i + 1) * p.trials].iter().flatten().collect();
                for name in ["theta_s", "phi_s", "theta_d", "phi_d"] {
                    let values: Vec<f64> = fits.iter().filter_map(|f| f.value(name)).collect();
                    if values.is_empty() {
                        continue;
                    }
                    let seed = config.seed.wrapping_add(medians.len() as u64);
                    let interval = median_bootstrap(&values, 0.95, BOOTSTRAP_RESAMPLES, seed)?;
                    medians.push(json!({ "panel": panel.name, "parameter": name, "interval": interval }));
                }
            }
            out.json("larmor_medians.json", &medians)?;
        }
        Ok(json!({
            "panels": p.panels.len(),
            "samples": t.len(),
            "fits": fits.iter().filter(|f| f.fit.is_some()).count(),
            "max_theta_error_rad": worst_theta,
            "median_intervals": medians.len(),
        }))
    }
}

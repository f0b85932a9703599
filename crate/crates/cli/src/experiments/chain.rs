//! Clean periodic chain: space-time field from a single-site source, its 2D spectrum and ridge.

use adqc_core::exact::{self, build_tfim, Propagator};
use adqc_core::fermion::{init_pi_pulses, x_basis_field, BdGPropagator, BdGSystem, ParitySector};
use adqc_core::magnon::MagnonModel;
use adqc_core::model::dispersion_exact;
use adqc_core::spectral::{
    compare_dispersion, extract_ridges, fft2, FieldBasis, SpaceTimeField, SpectrumOptions, Window,
};
use adqc_core::EffectiveXYModel;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{require, Engine, Experiment, ExperimentConfig, ExperimentParams};
use crate::error::CliError;
use crate::output::{num, OutputDir};

/// Length of the dense cross-check chain.
const CROSS_CHECK_SITES: usize = 8;
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub delta: f64,
    pub coupling: f64,
    pub length: usize,
    pub steps: usize,
    pub dt: f64,
    pub basis: FieldBasis,
    pub source: usize,
    pub window: Window,
    pub pad_factor: usize,
    /// Fermion engine only: compare against the dense model on a short chain first.
    pub cross_check: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta: 2.0,
            coupling: -0.6,
            length: 56,
            steps: 200,
            dt: 0.1,
            basis: FieldBasis::X,
            source: 0,
            window: Window::Hann,
            pad_factor: 4,
            cross_check: true,
        }
    }
}

fn times(steps: usize, dt: f64) -> Vec<f64> {
    (0..steps).map(|s| s as f64 * dt).collect()
}

fn density(tau_x: &[f64]) -> Vec<f64> {
    tau_x.iter().map(|z| 0.5 * (1.0 - z)).collect()
}

fn fermion_rows(p: &Params, length: usize, t: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let system = BdGSystem::clean(length, p.delta, p.coupling)?;
    Ok(match p.basis {
        FieldBasis::X => x_basis_field(&system, p.source, t)?,
        FieldBasis::Z => {
            // One excitation: odd fermion parity.
            let system = system.with_parity(ParitySector::Odd);
            let state = init_pi_pulses(&system, &[p.source])?;
            let prop = BdGPropagator::new(&system);
            let prepared = prop.prepare(&state)?;
            t.iter().map(|&t| density(&prepared.tau_x_at(t))).collect()
        }
    })
}

fn exact_rows(p: &Params, length: usize, t: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let model = EffectiveXYModel::clean(length, p.delta, p.coupling, true)?;
    let prop = Propagator::new(&build_tfim(&model)?);
    let psi0 = match p.basis {
        FieldBasis::X => exact::plus_state(length, p.source)?,
        FieldBasis::Z => exact::basis_state(length, &[p.source])?,
    };
    Ok(prop
        .trajectory(&psi0, t)?
        .iter()
        .map(|psi| match p.basis {
            FieldBasis::X => exact::sigma_x_expectations(psi),
            FieldBasis::Z => density(&exact::lab_tau_x(psi)),
        })
        .collect())
}

fn magnon_rows(p: &Params, t: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let m = MagnonModel::new(p.delta, p.coupling, p.length)?;
    let l = p.length;
    Ok(t.iter()
        .map(|&t| {
            (0..l)
                .map(|n| {
                    let r = (n + l - p.source) % l;
                    match p.basis {
                        FieldBasis::X => m.m_x_profile(r, t),
                        FieldBasis::Z => m.excitation_density(r, t),
                    }
                })
                .collect()
        })
        .collect())
}

impl Params {
    fn model_curve(&self, engine: Engine, k: f64) -> f64 {
        match (self.basis, engine) {
            (FieldBasis::X, Engine::Magnon) => self.delta + self.coupling * k.cos(),
            (FieldBasis::X, _) => dispersion_exact(self.delta, self.coupling, k),
            (FieldBasis::Z, _) => (2.0 * self.coupling * (0.5 * k).sin()).abs(),
        }
    }

    fn cross_check(&self) -> Result<f64, CliError> {
        let mut p = self.clone();
        p.source = 0;
        let t = times(50, 0.37);
        let a = fermion_rows(&p, CROSS_CHECK_SITES, &t)?;
        let b = exact_rows(&p, CROSS_CHECK_SITES, &t)?;
        let worst = a
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if worst > CROSS_CHECK_TOL {
            return Err(CliError::Numerical(format!(
                "fermion engine deviates from the dense model by {worst:e} at L = {CROSS_CHECK_SITES}"
            )));
        }
        Ok(worst)
    }
}

impl ExperimentParams for Params {
    const KIND: Experiment = Experiment::Chain;
    const ENGINES: &'static [Engine] = &[Engine::Fermion, Engine::Magnon, Engine::Exact];

    fn validate(&self, engine: Engine) -> Result<(), CliError> {
        require(self.delta > 0.0 && self.delta.is_finite(), || format!("delta = {} must be positive", self.delta))?;
        require(self.coupling.is_finite(), || "coupling must be finite".into())?;
        require(self.length >= 2, || "length must be at least 2".into())?;
        require(self.source < self.length, || format!("source {} outside the chain", self.source))?;
        require(self.steps >= 4, || "at least 4 time steps are required".into())?;
        require(self.dt > 0.0 && self.dt.is_finite(), || "dt must be positive".into())?;
        require(self.pad_factor >= 1, || "pad_factor must be at least 1".into())?;
        match engine {
            Engine::Exact => require(self.length <= exact::MAX_SITES, || {
                format!("exact engine is limited to {} sites", exact::MAX_SITES)
            }),
            Engine::Magnon => MagnonModel::new(self.delta, self.coupling, self.length)
                .map(|_| ())
                .map_err(|e| CliError::Config(e.to_string())),
            _ => Ok(()),
        }
    }

    fn run(config: &ExperimentConfig<Self>, out: &OutputDir) -> Result<serde_json::Value, CliError> {
        let p = &config.params;
        let engine = config.engine();
        let cross = if engine == Engine::Fermion && p.cross_check { Some(p.cross_check()?) } else { None };
        let t = times(p.steps, p.dt);
        let rows = match engine {
            Engine::Fermion => fermion_rows(p, p.length, &t)?,
            Engine::Exact => exact_rows(p, p.length, &t)?,
            _ => magnon_rows(p, &t)?,
        };
        let mut columns: Vec<String> = vec!["t_ns".into()];
        columns.extend((0..p.length).map(|n| format!("site_{n}")));
        let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
        out.csv(
            "chain_field.csv",
            &column_refs,
            t.iter().zip(&rows).map(|(&tk, row)| std::iter::once(num(tk)).chain(row.iter().map(|&v| num(v))).collect::<Vec<_>>()),
        )?;

        // Shift the source to site 0 so the spectrum phase convention is fixed.
        let shifted: Vec<Vec<f64>> =
            rows.iter().map(|r| (0..p.length).map(|n| r[(n + p.source) % p.length]).collect()).collect();
        let field = SpaceTimeField::new(shifted, p.dt, p.basis)?;
        let spectrum = fft2(&field, SpectrumOptions { window: p.window, pad_factor: p.pad_factor })?;
        out.csv(
            "chain_spectrum.csv",
            &["k", "omega_ghz", "magnitude"],
            spectrum.k_grid.iter().enumerate().flat_map(|(ki, &k)| {
                let col = &spectrum.magnitude[ki];
                spectrum.omega_grid.iter().zip(col).map(move |(&w, &m)| [num(k), num(w), num(m)])
            }),
        )?;
        let ridge = extract_ridges(&spectrum)?;
        let curve: Vec<f64> = spectrum.k_grid.iter().map(|&k| p.model_curve(engine, k)).collect();
        let cmp = compare_dispersion(&ridge, &curve, spectrum.bin_width)?;
        out.csv(
            "chain_ridge.csv",
            &["k", "omega_peak_ghz", "contrast", "low_contrast", "model_omega_ghz"],
            ridge.iter().zip(&curve).map(|(r, &c)| {
                [num(r.k), num(r.omega), num(r.contrast), r.low_contrast.to_string(), num(c)]
            }),
        )?;
        let summary = json!({
            "engine": engine,
            "basis": p.basis,
            "length": p.length,
            "bin_width_ghz": spectrum.bin_width,
            "comparison": cmp,
            "within_one_bin": cmp.max_dev_bins <= 1.0,
            "dense_cross_check_max_dev": cross,
        });
        out.json("chain_summary.json", &summary)?;
        Ok(summary)
    }
}

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bdg::{init_pi_pulses, BdGPropagator, BdGSystem};
use crate::error::{Error, Result};

/// Imbalance trace of one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceSeries {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub disorder: f64,
    pub seed: u64,
    pub realization: u64,
}

impl ImbalanceSeries {
    /// Mean of I over grid points inside [t_start, t_end].
    pub fn window_average(&self, t_start: f64, t_end: f64) -> Result<f64> {
        let picked: Vec<f64> = self
            .t_grid
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t_start - 1e-9 && **t <= t_end + 1e-9)
            .map(|(_, v)| *v)
            .collect();
        if picked.is_empty() {
            return Err(Error::Validation(format!("no samples in [{t_start}, {t_end}] ns")));
        }
        Ok(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

/// Sites excited in the staggered initial state; they count as the "odd" sublattice.
pub fn staggered_sites(length: usize) -> Vec<usize> {
    (1..length).step_by(2).collect()
}

/// I = (p_odd − p_even)/(p_odd + p_even) from ⟨τx_i⟩, odd meaning 0-based odd sites.
pub fn imbalance_value(tau_x: &[f64]) -> Result<f64> {
    let l = tau_x.len();
    if l == 0 || l % 2 == 1 {
        return Err(Error::Validation(format!("imbalance needs an even chain, got L = {l}")));
    }
    let (mut odd, mut even) = (0.0, 0.0);
    for (i, &m) in tau_x.iter().enumerate() {
        if i % 2 == 1 {
            odd += 1.0 - m;
        } else {
            even += 1.0 - m;
        }
    }
    odd /= l as f64;
    even /= l as f64;
    let den = odd + even;
    if den.abs() < 1e-12 {
        return Err(Error::UndefinedImbalance(den));
    }
    Ok((odd - even) / den)
}

pub fn imbalance(
    t_grid: &[f64],
    tau_x_series: &[Vec<f64>],
    disorder: f64,
    seed: u64,
    realization: u64,
) -> Result<ImbalanceSeries> {
    if t_grid.len() != tau_x_series.len() {
        return Err(Error::Dimension { expected: t_grid.len(), got: tau_x_series.len() });
    }
    let values = tau_x_series.iter().map(|m| imbalance_value(m)).collect::<Result<Vec<_>>>()?;
    Ok(ImbalanceSeries { t_grid: t_grid.to_vec(), values, disorder, seed, realization })
}

/// Disorder scale |𝒥|: mean absolute coupling of the template.
fn coupling_scale(system: &BdGSystem) -> f64 {
    system.couplings.iter().map(|j| j.abs()).sum::<f64>() / system.couplings.len() as f64
}

/// One realization: δΔ_i uniform on [−|𝒥|W/2, |𝒥|W/2] added to A_i.
pub fn disorder_realization(template: &BdGSystem, w: f64, seed: u64, realization: u64) -> BdGSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    let scale = coupling_scale(template) * w;
    let mut out = template.clone();
    for a in &mut out.site_energies {
        let u: f64 = rng.random();
        *a += (u - 0.5) * scale;
    }
    out
}

pub fn disorder_ensemble(template: &BdGSystem, w: f64, n_realizations: usize, seed: u64) -> Result<Vec<BdGSystem>> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::Validation(format!("disorder strength {w} must be non-negative")));
    }
    Ok((0..n_realizations as u64).map(|r| disorder_realization(template, w, seed, r)).collect())
}

/// Imbalance dynamics from the staggered state for one system.
pub fn staggered_imbalance(system: &BdGSystem, t_grid: &[f64]) -> Result<Vec<f64>> {
    let sites = staggered_sites(system.len());
    let state = init_pi_pulses(system, &sites)?;
    let prop = BdGPropagator::new(system);
    let prepared = prop.prepare(&state)?;
    let l = system.len();
    if l % 2 == 1 {
        return Err(Error::Validation(format!("imbalance needs an even chain, got L = {l}")));
    }
    let even: Vec<usize> = (0..l).step_by(2).collect();
    let (odd_sum, even_sum) = (prepared.site_set_readout(&sites)?, prepared.site_set_readout(&even)?);
    t_grid
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::Domain(format!("time {t} must be non-negative")));
            }
            let (odd, even) = (odd_sum.at(t), even_sum.at(t));
            let den = 2.0 * (odd + even) / l as f64;
            if den.abs() < 1e-12 {
                return Err(Error::UndefinedImbalance(den));
            }
            Ok((odd - even) / (odd + even))
        })
        .collect()
}

/// Runs every realization in parallel; output is ordered by realization index.
pub fn run_ensemble(
    template: &BdGSystem,
    w: f64,
    n_realizations: usize,
    seed: u64,
    t_grid: &[f64],
) -> Result<Vec<ImbalanceSeries>> {
    if template.len() % 2 == 1 {
        return Err(Error::Validation("staggered initialization needs an even chain".into()));
    }
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::Validation(format!("disorder strength {w} must be non-negative")));
    }
    (0..n_realizations as u64)
        .into_par_iter()
        .map(|r| {
            let system = disorder_realization(template, w, seed, r);
            let values = staggered_imbalance(&system, t_grid)?;
            Ok(ImbalanceSeries { t_grid: t_grid.to_vec(), values, disorder: w, seed, realization: r })
        })
        .collect()
}

/// Ensemble mean and standard error of the window-averaged imbalance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateImbalance {
    pub disorder: f64,
    pub mean: f64,
    pub stderr: f64,
    pub realizations: usize,
}

pub fn late_imbalance(series: &[ImbalanceSeries], t_start: f64, t_end: f64) -> Result<LateImbalance> {
    if series.is_empty() {
        return Err(Error::Validation("empty ensemble".into()));
    }
    let avgs = series.iter().map(|s| s.window_average(t_start, t_end)).collect::<Result<Vec<_>>>()?;
    let n = avgs.len() as f64;
    let mean = avgs.iter().sum::<f64>() / n;
    let stderr = if avgs.len() > 1 {
        (avgs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(LateImbalance { disorder: series[0].disorder, mean, stderr, realizations: avgs.len() })
}

/// Ĩ ≈ c·W^p fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub coefficient: f64,
    pub coefficient_stderr: f64,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub points: usize,
}

pub fn fit_quadratic_scaling(w_values: &[f64], late: &[f64]) -> Result<ScalingFit> {
    if w_values.len() != late.len() {
        return Err(Error::Dimension { expected: w_values.len(), got: late.len() });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&w, &i) in w_values.iter().zip(late) {
        if !(w > 0.0 && w <= 2.0 + 1e-12) {
            continue;
        }
        if i <= 0.0 {
            warn!("dropping non-positive late imbalance {i} at W = {w}");
            continue;
        }
        xs.push(w.ln());
        ys.push(i.ln());
    }
    let n = xs.len();
    if n < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 usable points with 0 < W <= 2, have {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::DegenerateFit("all W values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    let slope_se = (s2 / sxx).sqrt();
    let icpt_se = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let coefficient = icpt.exp();
    Ok(ScalingFit {
        coefficient,
        coefficient_stderr: coefficient * icpt_se,
        exponent: slope,
        exponent_stderr: slope_se,
        points: n,
    })
}

/// Fit grid for the small-W regime: 2^{k/2}, k = −3..=2.
pub fn small_w_grid() -> Vec<f64> {
    (-3..=2).map(|k| 2f64.powf(k as f64 / 2.0)).collect()
}

pub const DEFAULT_W_SET: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 8.0];
pub const LATE_WINDOW_NS: (f64, f64) = (15.0, 20.0);

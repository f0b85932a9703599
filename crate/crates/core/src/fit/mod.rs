//! Nonlinear least-squares parameter extraction.

mod exchange;
mod larmor;
pub mod lm;

pub use exchange::{fit_exchange, fit_szsz, ExchangeInit, ExchangeSeries};
pub use larmor::{
    fit_larmor, larmor_params_from, wrap_angles, LarmorFitSpec, LarmorParam, LarmorParams, DEFAULT_WINDOW_NS,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named estimates with standard errors s²(JᵀJ)⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub units: Vec<String>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub rss: f64,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn error(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.stderr[i])
    }
}

/// Adds i.i.d. N(0, σ²) noise from a seeded stream.
pub fn add_gaussian_noise(values: &mut [f64], sigma: f64, seed: u64, stream: u64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Validation(format!("noise σ = {sigma} must be finite and non-negative")));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Validation(format!("noise σ = {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for v in values {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

/// Sample median with a percentile-bootstrap confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianInterval {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub samples: usize,
    pub resamples: usize,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median_bootstrap(values: &[f64], confidence: f64, resamples: usize, seed: u64) -> Result<MedianInterval> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("median needs at least one finite value".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) || resamples == 0 {
        return Err(Error::Validation(format!("confidence {confidence} must be in (0, 1) with resamples > 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut buf = vec![0.0; n];
    let mut medians = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = values[rng.random_range(0..n)];
        }
        medians.push(median_of(&sorted(&buf)));
    }
    medians.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - confidence);
    let at = |q: f64| medians[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok(MedianInterval {
        median: median_of(&sorted(values)),
        lower: at(tail),
        upper: at(1.0 - tail),
        confidence,
        samples: n,
        resamples,
    })
}

#[cfg(test)]
mod tests;

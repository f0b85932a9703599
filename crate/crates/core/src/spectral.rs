//! Space-time Fourier analysis of magnetization fields.
//!
//! Convention: X(k, ω) = Σ_{n,t} x(n, t) e^{−i(kn − 2πωt)}, so a travelling wave
//! cos(k0 n − 2πω0 t) lands on (k0, ω0). ω is in GHz; only ω ≥ 0 is returned.

use log::warn;
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::momentum_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldBasis {
    X,
    Z,
}

impl std::fmt::Display for FieldBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::X => "x",
            Self::Z => "z",
        })
    }
}

/// values[t][n] on t = 0, dt, 2dt, … and integer sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub values: Vec<Vec<f64>>,
    pub dt: f64,
    pub basis: FieldBasis,
}

impl SpaceTimeField {
    pub fn new(values: Vec<Vec<f64>>, dt: f64, basis: FieldBasis) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation("field needs at least 2 time steps".into()));
        }
        let l = values[0].len();
        if l < 2 || values.iter().any(|r| r.len() != l) {
            return Err(Error::Validation("field rows must share a length of at least 2".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("time step {dt} must be positive")));
        }
        if let Some(v) = values.iter().flatten().find(|v| !(v.abs() <= 1.0 + 1e-6)) {
            return Err(Error::Validation(format!("field value {v} outside [-1, 1]")));
        }
        Ok(Self { values, dt, basis })
    }

    /// Builds a field from explicit sample times, which must be evenly spaced.
    pub fn from_samples(t_grid: &[f64], values: Vec<Vec<f64>>, basis: FieldBasis) -> Result<Self> {
        if t_grid.len() != values.len() {
            return Err(Error::Dimension { expected: t_grid.len(), got: values.len() });
        }
        if t_grid.len() < 2 {
            return Err(Error::Validation("field needs at least 2 time steps".into()));
        }
        let dt = t_grid[1] - t_grid[0];
        let uniform = t_grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
        if !uniform {
            return Err(Error::Validation("time grid is not uniform".into()));
        }
        Self::new(values, dt, basis)
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn sites(&self) -> usize {
        self.values[0].len()
    }

    /// Native frequency resolution 1/(T·dt) in GHz.
    pub fn bin_width(&self) -> f64 {
        1.0 / (self.steps() as f64 * self.dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    None,
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub window: Window,
    pub pad_factor: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { window: Window::Hann, pad_factor: 4 }
    }
}

/// One-sided |X(k, ω)|, magnitude[k][ω].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub k_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub magnitude: Vec<Vec<f64>>,
    /// Native resolution 1/(T·dt), independent of padding.
    pub bin_width: f64,
    pub basis: FieldBasis,
}

impl Spectrum {
    pub fn omega_step(&self) -> f64 {
        self.omega_grid[1] - self.omega_grid[0]
    }

    pub fn total_power(&self) -> f64 {
        self.magnitude.iter().flatten().map(|m| m * m).sum()
    }
}

fn window_weights(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::None => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
            .collect(),
    }
}

/// Σ_{n,t} |w_t x(n,t)|², the quantity preserved by `fft2`.
pub fn windowed_power(field: &SpaceTimeField, window: Window) -> f64 {
    let w = window_weights(window, field.steps());
    field
        .values
        .iter()
        .zip(&w)
        .map(|(row, wt)| row.iter().map(|x| (wt * x).powi(2)).sum::<f64>())
        .sum()
}

/// Full complex transform grid[k][j] over the padded time axis, unnormalized.
fn transform(field: &SpaceTimeField, options: SpectrumOptions) -> Result<Vec<Vec<Complex64>>> {
    if options.pad_factor == 0 {
        return Err(Error::Validation("pad factor must be at least 1".into()));
    }
    let l = field.sites();
    let nt = field.steps();
    let np = nt * options.pad_factor;
    let w = window_weights(options.window, nt);
    let mut planner = FftPlanner::<f64>::new();
    let space = planner.plan_fft_forward(l);
    let time = planner.plan_fft_inverse(np);

    let mut grid = vec![vec![Complex64::new(0.0, 0.0); np]; l];
    let mut row = vec![Complex64::new(0.0, 0.0); l];
    for (t, vals) in field.values.iter().enumerate() {
        for (r, v) in row.iter_mut().zip(vals) {
            *r = Complex64::new(v * w[t], 0.0);
        }
        space.process(&mut row);
        for k in 0..l {
            grid[k][t] = row[k];
        }
    }
    for col in &mut grid {
        time.process(col);
    }
    Ok(grid)
}

/// 2D transform, normalized by 1/sqrt(L·T_pad); interior ω bins carry a √2 so that
/// the one-sided magnitudes satisfy Σ magnitude² = `windowed_power`.
pub fn fft2(field: &SpaceTimeField, options: SpectrumOptions) -> Result<Spectrum> {
    let grid = transform(field, options)?;
    let l = field.sites();
    let np = grid[0].len();
    let norm = 1.0 / ((l * np) as f64).sqrt();
    let half = np / 2;
    let magnitude = grid
        .iter()
        .map(|col| {
            (0..=half)
                .map(|j| {
                    let interior = j != 0 && !(np % 2 == 0 && j == half);
                    let s = if interior { std::f64::consts::SQRT_2 } else { 1.0 };
                    col[j].norm() * norm * s
                })
                .collect()
        })
        .collect();
    let df = 1.0 / (np as f64 * field.dt);
    Ok(Spectrum {
        k_grid: momentum_grid(l),
        omega_grid: (0..=half).map(|j| j as f64 * df).collect(),
        magnitude,
        bin_width: field.bin_width(),
        basis: field.basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub k: f64,
    pub omega: f64,
    pub contrast: f64,
    pub low_contrast: bool,
}

pub const CONTRAST_THRESHOLD: f64 = 1.5;

/// Peak ω at momentum index `k_index`, parabola-refined on the padded grid.
pub fn extract_ridge(spectrum: &Spectrum, k_index: usize) -> Result<RidgePoint> {
    let col = spectrum
        .magnitude
        .get(k_index)
        .ok_or_else(|| Error::Validation(format!("k index {k_index} outside spectrum")))?;
    if col.len() < 3 {
        return Err(Error::Validation("spectrum too short for a ridge".into()));
    }
    let start = if spectrum.basis == FieldBasis::Z { 1 } else { 0 };
    let (j, peak) = col
        .iter()
        .enumerate()
        .skip(start)
        .fold((start, f64::NEG_INFINITY), |best, (j, &m)| if m > best.1 { (j, m) } else { best });
    let mean = col[start..].iter().sum::<f64>() / (col.len() - start) as f64;
    let contrast = if mean > 0.0 { peak / mean } else { 0.0 };
    let low_contrast = !(contrast >= CONTRAST_THRESHOLD);
    if low_contrast {
        warn!("low ridge contrast {contrast:.2} at k index {k_index}");
    }
    let mut pos = j as f64;
    if j > start && j + 1 < col.len() {
        let (a, b, c) = (col[j - 1], col[j], col[j + 1]);
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            pos += (0.5 * (a - c) / den).clamp(-0.5, 0.5);
        }
    }
    Ok(RidgePoint {
        k: spectrum.k_grid[k_index],
        omega: pos * spectrum.omega_step(),
        contrast,
        low_contrast,
    })
}

pub fn extract_ridges(spectrum: &Spectrum) -> Result<Vec<RidgePoint>> {
    (0..spectrum.k_grid.len()).map(|k| extract_ridge(spectrum, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionComparison {
    pub max_dev_bins: f64,
    pub rms_dev_bins: f64,
    pub qualified: usize,
}

/// Ridge vs model curve (one value per ridge point), in units of `bin_width`;
/// low-contrast points are skipped.
pub fn compare_dispersion(ridge: &[RidgePoint], model_curve: &[f64], bin_width: f64) -> Result<DispersionComparison> {
    if ridge.len() != model_curve.len() {
        return Err(Error::Dimension { expected: ridge.len(), got: model_curve.len() });
    }
    if !(bin_width > 0.0) {
        return Err(Error::Validation("bin width must be positive".into()));
    }
    let devs: Vec<f64> = ridge
        .iter()
        .zip(model_curve)
        .filter(|(r, _)| !r.low_contrast)
        .map(|(r, m)| (r.omega - m).abs() / bin_width)
        .collect();
    if devs.is_empty() {
        return Ok(DispersionComparison { max_dev_bins: 0.0, rms_dev_bins: 0.0, qualified: 0 });
    }
    let max = devs.iter().copied().fold(0.0, f64::max);
    let rms = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
    Ok(DispersionComparison { max_dev_bins: max, rms_dev_bins: rms, qualified: devs.len() })
}

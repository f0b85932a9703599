use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::lm::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::error::{Error, Result};
use crate::lindblad::larmor_eq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LarmorParam {
    Delta,
    T1,
    T2,
    ThetaS,
    PhiS,
    ThetaD,
    PhiD,
}

impl LarmorParam {
    pub const ALL: [LarmorParam; 7] = [
        Self::Delta,
        Self::T1,
        Self::T2,
        Self::ThetaS,
        Self::PhiS,
        Self::ThetaD,
        Self::PhiD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::T1 => "t1",
            Self::T2 => "t2",
            Self::ThetaS => "theta_s",
            Self::PhiS => "phi_s",
            Self::ThetaD => "theta_d",
            Self::PhiD => "phi_d",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Self::Delta => "GHz",
            Self::T1 | Self::T2 => "ns",
            _ => "rad",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&p| p == self).unwrap()
    }
}

/// Full parameter set of the Larmor model; T1, T2 may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LarmorParams {
    pub delta: f64,
    pub t1: f64,
    pub t2: f64,
    pub theta_s: f64,
    pub phi_s: f64,
    pub theta_d: f64,
    pub phi_d: f64,
}

impl LarmorParams {
    fn to_array(self) -> [f64; 7] {
        [self.delta, self.t1, self.t2, self.theta_s, self.phi_s, self.theta_d, self.phi_d]
    }

    fn from_array(a: [f64; 7]) -> Self {
        Self { delta: a[0], t1: a[1], t2: a[2], theta_s: a[3], phi_s: a[4], theta_d: a[5], phi_d: a[6] }
    }

    #[cfg(test)]
    pub(super) fn to_array_for_test(self) -> [f64; 7] {
        self.to_array()
    }

    #[cfg(test)]
    pub(super) fn from_array_for_test(a: [f64; 7]) -> Self {
        Self::from_array(a)
    }

    pub fn get(&self, p: LarmorParam) -> f64 {
        self.to_array()[p.index()]
    }

    pub fn eval(&self, tau: f64) -> f64 {
        larmor_eq(self.theta_s, self.phi_s, self.theta_d, self.phi_d, self.delta, self.t1, self.t2, tau)
    }

    /// θ into [0, π] and φ into [0, 2π) without changing the model values.
    pub fn canonical(mut self) -> Self {
        (self.theta_s, self.phi_s) = wrap_angles(self.theta_s, self.phi_s);
        (self.theta_d, self.phi_d) = wrap_angles(self.theta_d, self.phi_d);
        self
    }

    /// ∂m/∂p for every parameter at elapsed time τ.
    pub fn gradient(&self, tau: f64) -> [f64; 7] {
        let (sts, cts) = self.theta_s.sin_cos();
        let (std, ctd) = self.theta_d.sin_cos();
        let e1 = if self.t1.is_infinite() { 1.0 } else { (-tau / self.t1).exp() };
        let e2 = if self.t2.is_infinite() { 1.0 } else { (-tau / self.t2).exp() };
        let arg = 2.0 * PI * self.delta * tau + self.phi_s - self.phi_d;
        let (sa, ca) = arg.sin_cos();
        let de1 = if self.t1.is_infinite() { 0.0 } else { e1 * tau / (self.t1 * self.t1) };
        let de2 = if self.t2.is_infinite() { 0.0 } else { e2 * tau / (self.t2 * self.t2) };
        [
            -std * sts * e2 * sa * 2.0 * PI * tau,
            -ctd * (1.0 - cts) * de1,
            std * sts * ca * de2,
            -ctd * e1 * sts + std * cts * ca * e2,
            -std * sts * e2 * sa,
            -std * (1.0 - e1 * (1.0 - cts)) + ctd * sts * ca * e2,
            std * sts * e2 * sa,
        ]
    }
}

/// Principal range for a polar/azimuth pair: θ ∈ [0, π], φ ∈ [0, 2π).
pub fn wrap_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = theta.rem_euclid(2.0 * PI);
    let mut p = phi;
    if t > PI {
        t = 2.0 * PI - t;
        p += PI;
    }
    (t, p.rem_euclid(2.0 * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LarmorFitSpec {
    pub free: Vec<LarmorParam>,
    pub init: LarmorParams,
    /// Only samples with window.0 ≤ t ≤ window.1 enter the fit.
    pub window: (f64, f64),
    /// Angle multi-start; off fits from `init` only.
    pub multistart: bool,
    /// Time origin of the model.
    pub t0: f64,
}

pub const DEFAULT_WINDOW_NS: (f64, f64) = (5.0, 28.0);

impl LarmorFitSpec {
    pub fn new(free: Vec<LarmorParam>, init: LarmorParams) -> Self {
        Self { free, init, window: DEFAULT_WINDOW_NS, multistart: true, t0: 0.0 }
    }
}

fn starts(spec: &LarmorFitSpec) -> Vec<LarmorParams> {
    if !spec.multistart {
        return vec![spec.init];
    }
    let angle_pairs = [(LarmorParam::ThetaD, LarmorParam::PhiD), (LarmorParam::ThetaS, LarmorParam::PhiS)];
    let free_pairs: Vec<_> = angle_pairs
        .iter()
        .filter(|(t, p)| spec.free.contains(t) || spec.free.contains(p))
        .collect();
    if free_pairs.is_empty() {
        return vec![spec.init];
    }
    // Eight starts: two polar reflections times four azimuth quadrants.
    let mut out = Vec::with_capacity(8);
    for reflect in [false, true] {
        for quarter in 0..4 {
            let mut a = spec.init.to_array();
            for (t, p) in &free_pairs {
                if reflect && spec.free.contains(t) {
                    a[t.index()] = PI - a[t.index()];
                }
                if spec.free.contains(p) {
                    a[p.index()] += quarter as f64 * PI / 2.0;
                }
            }
            out.push(LarmorParams::from_array(a));
        }
    }
    out
}

/// Least-squares fit of the Larmor model to (t, m) samples.
pub fn fit_larmor(t: &[f64], m: &[f64], spec: &LarmorFitSpec) -> Result<FitResult> {
    if t.len() != m.len() {
        return Err(Error::Dimension { expected: t.len(), got: m.len() });
    }
    let mut free = spec.free.clone();
    free.sort();
    free.dedup();
    if free.is_empty() {
        return Err(Error::Validation("no free parameters".into()));
    }
    for p in &free {
        if matches!(p, LarmorParam::T1 | LarmorParam::T2) && !spec.init.get(*p).is_finite() {
            return Err(Error::Validation(format!("free {} needs a finite initial value", p.name())));
        }
    }
    if !(spec.init.delta > 0.0) {
        return Err(Error::Validation(format!("initial Δ = {} must be positive", spec.init.delta)));
    }
    let (taus, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(m)
        .filter(|(t, _)| **t >= spec.window.0 && **t <= spec.window.1)
        .map(|(t, m)| (t - spec.t0, *m))
        .unzip();
    if taus.len() < 2 * free.len() {
        return Err(Error::Validation(format!(
            "{} samples in the fit window for {} free parameters",
            taus.len(),
            free.len()
        )));
    }
    let idx: Vec<usize> = free.iter().map(|p| p.index()).collect();
    let f_max = nyquist(&taus);
    let mut best: Option<(super::lm::LmOutcome, LarmorParams)> = None;
    let mut last_err = None;
    for start in starts(spec) {
        let base = start.to_array();
        let assemble = |x: &[f64]| -> LarmorParams {
            let mut a = base;
            for (k, &i) in idx.iter().enumerate() {
                a[i] = x[k];
            }
            LarmorParams::from_array(a)
        };
        let res = |x: &[f64]| -> Option<Vec<f64>> {
            let p = assemble(x);
            if !(p.t1 > 0.0 && p.t2 > 0.0 && p.delta > 0.0 && p.delta < f_max) {
                return None;
            }
            Some(taus.iter().zip(&ys).map(|(&tau, &y)| p.eval(tau) - y).collect())
        };
        let jac = |x: &[f64]| -> DMatrix<f64> {
            let p = assemble(x);
            DMatrix::from_fn(taus.len(), idx.len(), |r, c| p.gradient(taus[r])[idx[c]])
        };
        let x0: Vec<f64> = idx.iter().map(|&i| base[i]).collect();
        let out = match levenberg_marquardt(&res, Some(&jac), &x0, LmOptions::default()) {
            Ok(o) => o,
            Err(e @ (Error::DegenerateFit(_) | Error::Domain(_))) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(b, _)| out.rss < b.rss) {
            let p = assemble(&out.params);
            best = Some((out, p));
        }
    }
    let (out, params) = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or_else(|| Error::DegenerateFit("no start produced a fit".into()))),
    };
    let se = out.standard_errors(taus.len());
    let params = params.canonical();
    Ok(FitResult {
        names: free.iter().map(|p| p.name().to_string()).collect(),
        units: free.iter().map(|p| p.unit().to_string()).collect(),
        values: free.iter().map(|p| params.get(*p)).collect(),
        stderr: se,
        rss: out.rss,
        n_points: taus.len(),
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// Half the sampling rate of the densest spacing; frequencies beyond it alias.
pub(crate) fn nyquist(t: &[f64]) -> f64 {
    let dt = t.windows(2).map(|w| (w[1] - w[0]).abs()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if dt.is_finite() {
        0.5 / dt
    } else {
        f64::INFINITY
    }
}

/// Full parameter set after a fit: fitted values over `init`.
pub fn larmor_params_from(result: &FitResult, init: LarmorParams) -> LarmorParams {
    let mut a = init.to_array();
    for p in LarmorParam::ALL {
        if let Some(v) = result.value(p.name()) {
            a[p.index()] = v;
        }
    }
    LarmorParams::from_array(a)
}

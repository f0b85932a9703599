use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::lm::{levenberg_marquardt, LmOptions, LmOutcome};
use super::FitResult;
use crate::error::{Error, Result};

/// Two-qubit exchange trajectory from |10⟩.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExchangeSeries {
    pub t: Vec<f64>,
    pub sz1: Vec<f64>,
    pub sz2: Vec<f64>,
    pub szsz: Vec<f64>,
}

impl ExchangeSeries {
    fn validate(&self) -> Result<()> {
        let n = self.t.len();
        for len in [self.sz1.len(), self.sz2.len(), self.szsz.len()] {
            if len != n {
                return Err(Error::Dimension { expected: n, got: len });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeInit {
    pub t1: f64,
    pub t_phi: f64,
    pub coupling: f64,
}

impl Default for ExchangeInit {
    fn default() -> Self {
        Self { t1: 20.0, t_phi: 20.0, coupling: 0.2 }
    }
}

fn decay_fit(t: &[f64], szsz: &[f64], tau0: f64) -> Result<LmOutcome> {
    let res = |x: &[f64]| -> Option<Vec<f64>> {
        (x[0] > 0.0).then(|| t.iter().zip(szsz).map(|(t, y)| 1.0 - 2.0 * (-t / x[0]).exp() - y).collect())
    };
    let jac = |x: &[f64]| {
        nalgebra::DMatrix::from_fn(t.len(), 1, |r, _| -2.0 * (-t[r] / x[0]).exp() * t[r] / (x[0] * x[0]))
    };
    levenberg_marquardt(&res, Some(&jac), &[tau0], LmOptions::default())
}

/// T1 from ⟨σzσz⟩ = 1 − 2e^{−t/T1}.
pub fn fit_szsz(t: &[f64], szsz: &[f64], tau0: f64) -> Result<FitResult> {
    if t.len() != szsz.len() {
        return Err(Error::Dimension { expected: t.len(), got: szsz.len() });
    }
    if t.len() < 2 {
        return Err(Error::Validation("need at least 2 samples".into()));
    }
    let out = decay_fit(t, szsz, tau0)?;
    Ok(FitResult {
        names: vec!["t1".into()],
        units: vec!["ns".into()],
        stderr: out.standard_errors(t.len()),
        values: out.params,
        rss: out.rss,
        n_points: t.len(),
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// Two-stage fit: T1 from ⟨σzσz⟩, then (Tφ, 𝒥) from ⟨σz2⟩ − ⟨σz1⟩ = 2e^{−t/T1}e^{−t/Tφ}cos(2π𝒥t).
/// 𝒥 is reported as |𝒥|; the sign does not enter these observables.
pub fn fit_exchange(series: &ExchangeSeries, init: ExchangeInit) -> Result<FitResult> {
    series.validate()?;
    let n = series.t.len();
    if n < 6 {
        return Err(Error::Validation(format!("{n} samples for a three-parameter fit")));
    }
    let stage1 = decay_fit(&series.t, &series.szsz, init.t1)?;
    let t1 = stage1.params[0];
    let t = &series.t;
    let diff: Vec<f64> = series.sz2.iter().zip(&series.sz1).map(|(a, b)| a - b).collect();
    let model = |x: &[f64], t: f64| 2.0 * (-t / t1 - t / x[0]).exp() * (2.0 * PI * x[1] * t).cos();
    let f_max = super::larmor::nyquist(t);
    let res = |x: &[f64]| -> Option<Vec<f64>> {
        (x[0] > 0.0 && x[1].abs() < f_max).then(|| t.iter().zip(&diff).map(|(&t, y)| model(x, t) - y).collect())
    };
    let jac = |x: &[f64]| {
        nalgebra::DMatrix::from_fn(n, 2, |r, c| {
            let tt = t[r];
            let env = 2.0 * (-tt / t1 - tt / x[0]).exp();
            let arg = 2.0 * PI * x[1] * tt;
            match c {
                0 => env * arg.cos() * tt / (x[0] * x[0]),
                _ => -env * arg.sin() * 2.0 * PI * tt,
            }
        })
    };
    // Frequency starts: the initial guess plus a coarse grid up to the sampling limit.
    let span = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - t.iter().cloned().fold(f64::INFINITY, f64::min);
    let df = if span > 0.0 { 0.25 / span } else { 0.05 };
    let mut freqs = vec![init.coupling.abs().min(0.5 * f_max)];
    let mut f = df;
    while f < f_max.min(5.0) && freqs.len() < 400 {
        freqs.push(f);
        f += df;
    }
    // Score each frequency at the initial Tφ; LM starts from the best few.
    let score = |f: f64| res(&[init.t_phi, f]).map_or(f64::INFINITY, |r| r.iter().map(|x| x * x).sum());
    let mut ranked: Vec<(f64, f64)> = freqs.iter().map(|&f| (score(f), f)).collect();
    ranked[1..].sort_by(|a, b| a.0.total_cmp(&b.0));
    ranked.truncate(4);
    let mut best: Option<LmOutcome> = None;
    for (_, f0) in ranked {
        let Ok(out) = levenberg_marquardt(&res, Some(&jac), &[init.t_phi, f0], LmOptions::default()) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| out.rss < b.rss) {
            best = Some(out);
        }
    }
    let stage2 = best.ok_or_else(|| Error::DegenerateFit("oscillation fit failed from every start".into()))?;
    let se1 = stage1.standard_errors(n);
    let se2 = stage2.standard_errors(n);
    Ok(FitResult {
        names: vec!["t1".into(), "t_phi".into(), "coupling".into()],
        units: vec!["ns".into(), "ns".into(), "GHz".into()],
        values: vec![t1, stage2.params[0], stage2.params[1].abs()],
        stderr: vec![se1[0], se2[0], se2[1]],
        rss: stage1.rss + stage2.rss,
        n_points: n,
        converged: stage1.converged && stage2.converged,
        iterations: stage1.iterations + stage2.iterations,
    })
}

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub lambda0: f64,
    /// Relative step size below which the iteration is considered converged.
    pub step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 500, lambda0: 1e-3, step_tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub rss: f64,
    /// (JᵀJ)⁻¹ at the solution; scale by rss/(N − p) for the covariance.
    pub inverse_normal: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

impl LmOutcome {
    pub fn standard_errors(&self, n_points: usize) -> Vec<f64> {
        let p = self.params.len();
        let dof = n_points.saturating_sub(p).max(1) as f64;
        let s2 = self.rss / dof;
        (0..p).map(|i| (s2 * self.inverse_normal[(i, i)]).max(0.0).sqrt()).collect()
    }
}

pub type Residuals<'a> = dyn Fn(&[f64]) -> Option<Vec<f64>> + 'a;
pub type Jacobian<'a> = dyn Fn(&[f64]) -> DMatrix<f64> + 'a;

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Central differences with a relative step.
pub fn numeric_jacobian(residuals: &Residuals<'_>, x: &[f64], n: usize) -> Result<DMatrix<f64>> {
    let mut jac = DMatrix::zeros(n, x.len());
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1e-3);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (rp, rm) = match (residuals(&xp), residuals(&xm)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::DegenerateFit("model undefined next to the current point".into())),
        };
        for i in 0..n {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Damped Gauss–Newton: solve (JᵀJ + λ diag JᵀJ) δ = −Jᵀr; λ ×10 on reject, ÷10 on accept.
/// `residuals` returns None outside the model domain, which counts as a rejected step.
pub fn levenberg_marquardt(
    residuals: &Residuals<'_>,
    jacobian: Option<&Jacobian<'_>>,
    x0: &[f64],
    options: LmOptions,
) -> Result<LmOutcome> {
    let mut x = x0.to_vec();
    let mut r = residuals(&x).ok_or_else(|| Error::Domain("initial guess outside the model domain".into()))?;
    let n = r.len();
    if n < x.len() {
        return Err(Error::DegenerateFit(format!("{n} points for {} parameters", x.len())));
    }
    let jac_at = |x: &[f64]| -> Result<DMatrix<f64>> {
        match jacobian {
            Some(f) => Ok(f(x)),
            None => numeric_jacobian(residuals, x, n),
        }
    };
    let mut rss = sum_sq(&r);
    let mut history = vec![rss];
    let mut lambda = options.lambda0;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jac_at(&x)?;
    while iterations < options.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_vec(r.clone());
        if g.amax() == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let small = delta.iter().zip(&x).all(|(d, v)| d.abs() <= options.step_tol * (v.abs() + options.step_tol));
            match residuals(&trial) {
                Some(rt) if sum_sq(&rt) <= rss => {
                    let new_rss = sum_sq(&rt);
                    x = trial;
                    r = rt;
                    let tiny_gain = rss - new_rss <= 1e-15 * rss;
                    rss = new_rss;
                    history.push(rss);
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if small || tiny_gain {
                        converged = true;
                    }
                    break;
                }
                _ => {
                    if small {
                        converged = true;
                        break;
                    }
                    lambda *= 10.0;
                }
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // No downhill step at any damping: a stationary point.
            converged = true;
            break;
        }
        if rss == 0.0 {
            converged = true;
            break;
        }
        jac = jac_at(&x)?;
    }
    let jac = jac_at(&x)?;
    let jtj = jac.transpose() * &jac;
    let inverse_normal = invert_normal(&jtj)?;
    Ok(LmOutcome { params: x, rss, inverse_normal, iterations, converged, history })
}

fn invert_normal(jtj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = jtj.diagonal().map(|d| if d > 0.0 { d.sqrt() } else { 0.0 });
    if scale.iter().any(|&s| s == 0.0) {
        return Err(Error::DegenerateFit("a parameter does not affect the model".into()));
    }
    // Equilibrate before inverting so the conditioning test is scale-free.
    let eq = DMatrix::from_fn(jtj.nrows(), jtj.ncols(), |i, j| jtj[(i, j)] / (scale[i] * scale[j]));
    let eig = nalgebra::SymmetricEigen::new(eq.clone());
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e.abs())));
    if !(lo > 1e-14 * hi) {
        return Err(Error::DegenerateFit("singular Jacobian at the solution".into()));
    }
    let inv = eq.try_inverse().ok_or_else(|| Error::DegenerateFit("singular normal matrix".into()))?;
    Ok(DMatrix::from_fn(inv.nrows(), inv.ncols(), |i, j| inv[(i, j)] / (scale[i] * scale[j])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_recovery_and_monotone_objective() {
        let t: Vec<f64> = (0..60).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-t / 7.0f64).exp() + 0.3).collect();
        let res = |p: &[f64]| -> Option<Vec<f64>> {
            (p[1] > 0.0).then(|| t.iter().zip(&y).map(|(t, y)| p[0] * (-t / p[1]).exp() + p[2] - y).collect())
        };
        let out = levenberg_marquardt(&res, None, &[1.0, 2.0, 0.0], LmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.params[1] - 7.0).abs() < 1e-8);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn redundant_parameters_are_degenerate() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let res = |p: &[f64]| -> Option<Vec<f64>> { Some(t.iter().map(|t| (p[0] + p[1]) * t - 2.0 * t).collect()) };
        assert!(matches!(
            levenberg_marquardt(&res, None, &[0.3, 0.1], LmOptions::default()),
            Err(Error::DegenerateFit(_))
        ));
    }
}

//! One- and two-qubit open-system dynamics: closed forms and a master-equation integrator.

mod integrate;
mod spam;

pub use integrate::{
    exchange_hamiltonian, exchange_lindblad, lindblad_integrate, liouvillian, product_state,
    single_qubit_hamiltonian, single_qubit_jumps, two_qubit_jumps, ExchangeSample, JumpOperator,
};
pub use spam::{spam_symmetrize, Pairing};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};

/// Relaxation and pure dephasing times in ns; `f64::INFINITY` switches a channel off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub t1: f64,
    pub t_phi: f64,
}

impl NoiseParams {
    pub fn new(t1: f64, t_phi: f64) -> Result<Self> {
        if !(t1 > 0.0) || !(t_phi > 0.0) {
            return Err(Error::Validation(format!(
                "T1 = {t1} and Tφ = {t_phi} must be positive (or infinite)"
            )));
        }
        Ok(Self { t1, t_phi })
    }

    pub fn noiseless() -> Self {
        Self { t1: f64::INFINITY, t_phi: f64::INFINITY }
    }

    /// Recover Tφ from a measured T2; requires T2 ≤ 2 T1.
    pub fn from_t2(t1: f64, t2: f64) -> Result<Self> {
        let inv_phi = 1.0 / t2 - 0.5 / t1;
        if !(inv_phi >= 0.0) {
            return Err(Error::Validation(format!("T2 = {t2} exceeds 2 T1 = {}", 2.0 * t1)));
        }
        Self::new(t1, 1.0 / inv_phi)
    }

    /// 1/T2 = 1/Tφ + 1/(2 T1).
    pub fn t2(&self) -> f64 {
        1.0 / (1.0 / self.t_phi + 0.5 / self.t1)
    }
}

/// Direction on the Bloch sphere, θ ∈ [0, π], φ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAxis {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAxis {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(Error::Validation(format!("polar angle {theta} outside [0, π]")));
        }
        Ok(Self { theta: theta.clamp(0.0, PI), phi: phi.rem_euclid(2.0 * PI) })
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Unit vector with the azimuth measured along the free-precession sense of
    /// H = −(Δ/2)σz; Eq.-(6)-style angles are referenced to this frame.
    pub fn precession_vector(&self) -> [f64; 3] {
        let [x, y, z] = self.unit_vector();
        [x, -y, z]
    }
}

/// Bloch vector n with ρ = (1 + n·σ)/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub n: [f64; 3],
}

impl BlochState {
    pub fn new(n: [f64; 3]) -> Result<Self> {
        let s = Self { n };
        if !(s.norm() <= 1.0 + 1e-9) {
            return Err(Error::Validation(format!("Bloch vector norm {} exceeds 1", s.norm())));
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.n.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn density_matrix(&self) -> CMat {
        let [x, y, z] = self.n;
        CMat::from_row_slice(
            2,
            2,
            &[c(0.5 * (1.0 + z)), C64::new(0.5 * x, -0.5 * y), C64::new(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z))],
        )
    }

    pub fn from_density_matrix(rho: &CMat) -> Self {
        let r01 = rho[(0, 1)];
        Self { n: [2.0 * r01.re, -2.0 * r01.im, (rho[(0, 0)] - rho[(1, 1)]).re] }
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.n.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

fn decay(t: f64, tau: f64) -> f64 {
    if tau.is_infinite() {
        1.0
    } else {
        (-t / tau).exp()
    }
}

/// Closed-form Bloch solution under H = −(Δ/2)σz with relaxation towards (0, 0, 1).
pub fn bloch_evolve(n0: BlochState, delta: f64, noise: NoiseParams, t: f64) -> Result<BlochState> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("evolution time {t} must be non-negative")));
    }
    let (s, co) = (2.0 * PI * delta * t).sin_cos();
    let e2 = decay(t, noise.t2());
    let e1 = decay(t, noise.t1);
    let [x, y, z] = n0.n;
    Ok(BlochState {
        n: [(x * co + y * s) * e2, (-x * s + y * co) * e2, 1.0 - (1.0 - z) * e1],
    })
}

/// Expected magnetization along the detector axis for a qubit prepared along the source axis.
pub fn larmor_magnetization(
    source: BlochAxis,
    detector: BlochAxis,
    delta: f64,
    noise: NoiseParams,
    t: f64,
    t0: f64,
) -> Result<f64> {
    if !(t >= t0) {
        return Err(Error::Domain(format!("t = {t} precedes t0 = {t0}")));
    }
    Ok(larmor_eq(
        source.theta,
        source.phi,
        detector.theta,
        detector.phi,
        delta,
        noise.t1,
        noise.t2(),
        t - t0,
    ))
}

/// Eq.-(6) kernel on elapsed time `tau`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn larmor_eq(
    theta_s: f64,
    phi_s: f64,
    theta_d: f64,
    phi_d: f64,
    delta: f64,
    t1: f64,
    t2: f64,
    tau: f64,
) -> f64 {
    theta_d.cos() * (1.0 - decay(tau, t1) * (1.0 - theta_s.cos()))
        + theta_d.sin() * theta_s.sin() * (2.0 * PI * delta * tau + phi_s - phi_d).cos() * decay(tau, t2)
}

/// Approximate two-qubit observables from |10⟩ under exchange 𝒥 (GHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeObservables {
    pub sz1: f64,
    pub sz2: f64,
    pub szsz: f64,
    /// False when 2π𝒥Tφ < 10, outside the regime the approximation assumes.
    pub regime_ok: bool,
}

pub fn two_qubit_exchange(coupling: f64, noise: NoiseParams, t: f64) -> Result<ExchangeObservables> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("evolution time {t} must be non-negative")));
    }
    let regime_ok = 2.0 * PI * coupling.abs() * noise.t_phi >= 10.0;
    let e1 = decay(t, noise.t1);
    let osc = decay(t, noise.t_phi) * (2.0 * PI * coupling * t).cos();
    Ok(ExchangeObservables {
        sz1: 1.0 - e1 * (1.0 + osc),
        sz2: 1.0 - e1 * (1.0 - osc),
        szsz: 1.0 - 2.0 * e1,
        regime_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn t2_relation() {
        let n = NoiseParams::new(30.0, 37.0).unwrap();
        assert!((1.0 / n.t2() - (1.0 / 37.0 + 1.0 / 60.0)).abs() < 1e-15);
        assert!(n.t2() <= 2.0 * n.t1);
        let back = NoiseParams::from_t2(30.0, n.t2()).unwrap();
        assert!((back.t_phi - 37.0).abs() < 1e-10);
        assert!(NoiseParams::from_t2(10.0, 25.0).is_err());
        assert!(NoiseParams::new(-1.0, 3.0).is_err());
    }

    #[test]
    fn axis_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = BlochAxis::new(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)).unwrap();
            let n: f64 = a.unit_vector().iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(BlochAxis::new(3.5, 0.0).is_err());
    }

    #[test]
    fn relaxation_fixed_point() {
        let noise = NoiseParams::new(20.0, 15.0).unwrap();
        let n = bloch_evolve(BlochState::new([0.3, -0.5, -0.7]).unwrap(), 1.3, noise, 1e6 * 20.0).unwrap();
        assert!((n.n[0]).abs() < 1e-9 && n.n[1].abs() < 1e-9 && (n.n[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quarter_period_rotation() {
        let n = bloch_evolve(BlochState::new([1.0, 0.0, 0.0]).unwrap(), 2.0, NoiseParams::noiseless(), 0.125)
            .unwrap();
        assert!(n.n[0].abs() < 1e-15 && (n.n[1] + 1.0).abs() < 1e-15 && n.n[2].abs() < 1e-15);
    }

    #[test]
    fn negative_time_rejected() {
        let s = BlochState::new([0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(bloch_evolve(s, 1.0, NoiseParams::noiseless(), -1.0), Err(Error::Domain(_))));
        let a = BlochAxis::new(0.0, 0.0).unwrap();
        assert!(larmor_magnetization(a, a, 1.0, NoiseParams::noiseless(), 1.0, 2.0).is_err());
    }

    #[test]
    fn semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n0 = BlochState::new([0.6, -0.2, 0.1]).unwrap();
            let noise = NoiseParams::new(rng.random_range(5.0..50.0), rng.random_range(5.0..50.0)).unwrap();
            let d = rng.random_range(0.2..3.0);
            let (t1, t2) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let a = bloch_evolve(bloch_evolve(n0, d, noise, t1).unwrap(), d, noise, t2).unwrap();
            let b = bloch_evolve(n0, d, noise, t1 + t2).unwrap();
            for k in 0..3 {
                assert!((a.n[k] - b.n[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn larmor_special_cases() {
        let noise = NoiseParams::new(32.0, 12.0).unwrap();
        let up = BlochAxis::new(0.0, 0.0).unwrap();
        let down = BlochAxis::new(PI, 0.4).unwrap();
        let x = BlochAxis::new(PI / 2.0, 0.7).unwrap();
        for &t in &[0.0, 0.3, 4.0, 17.5] {
            assert!((larmor_magnetization(up, up, 1.0, noise, t, 0.0).unwrap() - 1.0).abs() < 1e-15);
            let m = larmor_magnetization(down, up, 1.0, noise, t, 0.0).unwrap();
            assert!((m - (1.0 - 2.0 * (-t / 32.0f64).exp())).abs() < 1e-14);
            let m = larmor_magnetization(x, x, 1.0, noise, t + 2.0, 2.0).unwrap();
            let want = (2.0 * PI * t).cos() * (-t / noise.t2()).exp();
            assert!((m - want).abs() < 1e-14);
        }
    }

    #[test]
    fn larmor_z_detector_is_azimuth_free() {
        let noise = NoiseParams::new(32.0, 12.0).unwrap();
        let s = BlochAxis::new(1.1, 2.3).unwrap();
        for &td in &[0.0, PI] {
            let base = larmor_magnetization(s, BlochAxis::new(td, 0.0).unwrap(), 1.0, noise, 3.3, 0.0).unwrap();
            for k in 0..16 {
                let d = BlochAxis::new(td, k as f64 * 0.4).unwrap();
                let m = larmor_magnetization(s, d, 1.0, noise, 3.3, 0.0).unwrap();
                assert!((m - base).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn larmor_at_t0() {
        let noise = NoiseParams::new(32.0, 12.0).unwrap();
        let s = BlochAxis::new(0.8, 1.9).unwrap();
        let d = BlochAxis::new(2.1, 0.3).unwrap();
        let m = larmor_magnetization(s, d, 1.0, noise, 5.0, 5.0).unwrap();
        let want = d.theta.cos() * s.theta.cos() + d.theta.sin() * s.theta.sin() * (s.phi - d.phi).cos();
        assert!((m - want).abs() < 1e-15);
    }

    #[test]
    fn exchange_initial_and_limits() {
        let noise = NoiseParams::new(30.0, 37.0).unwrap();
        let o = two_qubit_exchange(0.3, noise, 0.0).unwrap();
        assert_eq!((o.sz1, o.sz2, o.szsz), (-1.0, 1.0, -1.0));
        assert!(o.regime_ok);
        for &t in &[1.0, 5.5, 20.0] {
            let a = two_qubit_exchange(0.15, noise, t).unwrap();
            let b = two_qubit_exchange(0.30, noise, t).unwrap();
            assert_eq!(a.szsz, b.szsz);
            let u = two_qubit_exchange(0.3, NoiseParams::noiseless(), t).unwrap();
            assert!((u.sz1 + u.sz2).abs() < 1e-10);
        }
        assert!(!two_qubit_exchange(0.01, noise, 1.0).unwrap().regime_ok);
    }

    #[test]
    fn exchange_difference_period() {
        let noise = NoiseParams::new(30.0, 37.0).unwrap();
        for &t in &[0.7, 3.1, 9.0] {
            let a = two_qubit_exchange(0.3, noise, t).unwrap();
            let want = -2.0 * (-t / 30.0f64).exp() * (-t / 37.0f64).exp() * (2.0 * PI * 0.3 * t).cos();
            assert!((a.sz1 - a.sz2 - want).abs() < 1e-14);
            let p = two_qubit_exchange(0.3, NoiseParams::noiseless(), t + 10.0 / 3.0).unwrap();
            let q = two_qubit_exchange(0.3, NoiseParams::noiseless(), t).unwrap();
            assert!((p.sz1 - q.sz1).abs() < 1e-12);
        }
    }

    #[test]
    fn density_round_trip() {
        let s = BlochState::new([0.3, -0.4, 0.5]).unwrap();
        let back = BlochState::from_density_matrix(&s.density_matrix());
        for k in 0..3 {
            assert!((back.n[k] - s.n[k]).abs() < 1e-15);
        }
    }
}

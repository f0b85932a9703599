//! Single-excitation magnon predictions for the clean periodic chain.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::momentum_grid;
use crate::spectral::{FieldBasis, SpaceTimeField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnonModel {
    pub delta: f64,
    pub coupling: f64,
    pub length: usize,
}

impl MagnonModel {
    pub fn new(delta: f64, coupling: f64, length: usize) -> Result<Self> {
        if length < 2 || length % 2 == 1 {
            return Err(Error::Validation(format!("magnon chain length must be even and >= 2, got {length}")));
        }
        if !(delta.is_finite() && coupling.is_finite()) || delta == 0.0 {
            return Err(Error::Validation("magnon model needs finite Δ ≠ 0 and 𝒥".into()));
        }
        let ratio = (coupling / delta).abs();
        if ratio >= 1.0 {
            return Err(Error::Validation(format!("|𝒥/Δ| = {ratio} outside the weak-coupling model")));
        }
        if ratio > 0.3 {
            warn!("|𝒥/Δ| = {ratio:.3} above 0.3; first-order magnon model is rough here");
        }
        Ok(Self { delta, coupling, length })
    }

    pub fn momenta(&self) -> Vec<f64> {
        momentum_grid(self.length)
    }

    /// E_eff(k) = Δ + 𝒥 cos k.
    pub fn e_eff(&self, k: f64) -> f64 {
        self.delta + self.coupling * k.cos()
    }

    /// m_x(n, t) = (1/L) Σ_k cos(2π E_eff(k) t + k n).
    pub fn m_x_profile(&self, n: usize, t: f64) -> f64 {
        let l = self.length as f64;
        self.momenta()
            .iter()
            .map(|&k| (2.0 * PI * self.e_eff(k) * t + k * n as f64).cos())
            .sum::<f64>()
            / l
    }

    fn amplitude(&self, n: usize, t: f64) -> Complex64 {
        let l = self.length as f64;
        self.momenta()
            .iter()
            .map(|&k| Complex64::from_polar(1.0, k * n as f64 - 2.0 * PI * self.e_eff(k) * t))
            .sum::<Complex64>()
            / l
    }

    /// ρ(n, t) = |η(n, t)|² for an excitation launched at site 0.
    pub fn excitation_density(&self, n: usize, t: f64) -> f64 {
        self.amplitude(n, t).norm_sqr()
    }

    /// Peak frequencies ±E_eff(k) of the x-basis field.
    pub fn omega_peak_x(&self, k: f64) -> (f64, f64) {
        let e = self.e_eff(k);
        (e, -e)
    }

    /// Peak frequencies ±2𝒥 sin(k/2) of the density field.
    pub fn omega_peak_z(&self, k: f64) -> (f64, f64) {
        let w = 2.0 * self.coupling * (0.5 * k).sin();
        (w, -w)
    }

    /// Largest |dE_eff/dk|·2π in sites per ns.
    pub fn max_group_velocity(&self) -> f64 {
        2.0 * PI * self.coupling.abs()
    }

    /// m_x or ρ on t = 0, dt, …, (steps − 1)·dt.
    pub fn field(&self, basis: FieldBasis, dt: f64, steps: usize) -> Result<SpaceTimeField> {
        let rows: Vec<Vec<f64>> = (0..steps)
            .into_par_iter()
            .map(|s| {
                let t = s as f64 * dt;
                (0..self.length)
                    .map(|n| match basis {
                        FieldBasis::X => self.m_x_profile(n, t),
                        FieldBasis::Z => self.excitation_density(n, t),
                    })
                    .collect()
            })
            .collect();
        SpaceTimeField::new(rows, dt, basis)
    }
}

/// Time at which ρ(n, ·) first exceeds `threshold`, scanning in steps of `dt` up to `t_max`.
pub fn arrival_time(model: &MagnonModel, n: usize, threshold: f64, dt: f64, t_max: f64) -> Option<f64> {
    let steps = (t_max / dt).ceil() as usize;
    (0..=steps).map(|s| s as f64 * dt).find(|&t| model.excitation_density(n, t) > threshold)
}

/// Front speed from a least-squares line through (arrival time, distance) pairs.
pub fn front_speed(model: &MagnonModel, sites: &[usize], threshold: f64, dt: f64, t_max: f64) -> Result<f64> {
    let mut pts = Vec::new();
    for &n in sites {
        let d = n.min(model.length - n) as f64;
        if let Some(t) = arrival_time(model, n, threshold, dt, t_max) {
            pts.push((t, d));
        }
    }
    line_slope(&pts)
}

pub(crate) fn line_slope(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("need at least two arrival points".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("arrival times coincide".into()));
    }
    Ok(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{self, build_tfim, build_xy, Propagator};
    use crate::model::{dispersion_exact, EffectiveXYModel};

    #[test]
    fn dispersion_values() {
        let m = MagnonModel::new(2.0, -0.6, 56).unwrap();
        assert!((m.e_eff(PI / 2.0) - 2.0).abs() < 1e-15);
        assert!((m.e_eff(0.0) - 1.4).abs() < 1e-15);
        let (a, b) = m.omega_peak_z(PI);
        assert!((a + 1.2).abs() < 1e-15 && (b - 1.2).abs() < 1e-15);
        assert_eq!(m.omega_peak_z(0.0).0, 0.0);
        assert_eq!(m.omega_peak_x(PI / 2.0), (2.0, -2.0));
    }

    #[test]
    fn first_order_agreement_with_exact_band() {
        for &(d, j) in &[(2.0, -0.6), (2.0, 0.2), (5.0, 1.0), (1.0, -0.3)] {
            let m = MagnonModel::new(d, j, 64).unwrap();
            let bound = d * (j / d).powi(2) * 1.1;
            for k in m.momenta() {
                assert!((dispersion_exact(d, j, k) - m.e_eff(k)).abs() <= bound);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(MagnonModel::new(2.0, 0.1, 7).is_err());
        assert!(MagnonModel::new(2.0, 2.5, 8).is_err());
        assert!(MagnonModel::new(0.0, 0.1, 8).is_err());
    }

    #[test]
    fn initial_profiles_are_deltas() {
        let m = MagnonModel::new(2.0, -0.6, 12).unwrap();
        for n in 0..12 {
            let want = if n == 0 { 1.0 } else { 0.0 };
            assert!((m.m_x_profile(n, 0.0) - want).abs() < 1e-12);
            assert!((m.excitation_density(n, 0.0) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_symmetry_and_normalization() {
        let m = MagnonModel::new(2.0, -0.6, 14).unwrap();
        for &t in &[0.3, 2.2, 7.9] {
            let total: f64 = (0..14).map(|n| m.excitation_density(n, t)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for n in 1..14 {
                assert!((m.m_x_profile(n, t) - m.m_x_profile(14 - n, t)).abs() < 1e-12);
                assert!((m.excitation_density(n, t) - m.excitation_density(14 - n, t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_matches_xy_single_excitation_sector() {
        let l = 10;
        let j = 0.45;
        let m = MagnonModel::new(2.0, j, l).unwrap();
        let xy = EffectiveXYModel::clean(l, 2.0, j, true).unwrap();
        let prop = Propagator::new(&build_xy(&xy).unwrap());
        let psi0 = exact::basis_state(l, &[0]).unwrap();
        let mut t = 0.0;
        while j * t <= 4.0 {
            let sz = exact::sigma_z_expectations(&prop.evolve(&psi0, t).unwrap());
            for n in 0..l {
                assert!((m.excitation_density(n, t) - 0.5 * (1.0 - sz[n])).abs() < 1e-3, "t {t} n {n}");
            }
            t += 0.25;
        }
    }

    #[test]
    fn x_profile_tracks_tfim_in_weak_coupling() {
        // First order in 𝒥/Δ only; the test sits deep in that regime.
        let (l, d, j) = (8, 20.0, -0.6);
        let m = MagnonModel::new(d, j, l).unwrap();
        let tfim = EffectiveXYModel::clean(l, d, j, true).unwrap();
        let prop = Propagator::new(&build_tfim(&tfim).unwrap());
        let psi0 = exact::plus_state(l, 0).unwrap();
        let mut worst: f64 = 0.0;
        for s in 0..=100 {
            let t = s as f64 * 3.0 / j.abs() / 100.0;
            let sx = exact::sigma_x_expectations(&prop.evolve(&psi0, t).unwrap());
            for n in 0..l {
                worst = worst.max((m.m_x_profile(n, t) - sx[n]).abs());
            }
        }
        assert!(worst < 0.05, "worst {worst}");
    }

    #[test]
    fn ballistic_front() {
        let m = MagnonModel::new(2.0, 0.2, 124).unwrap();
        let sites: Vec<usize> = (10..=40).step_by(5).collect();
        let v = front_speed(&m, &sites, 0.01, 0.01, 60.0).unwrap();
        assert!((v / m.max_group_velocity() - 1.0).abs() < 0.15, "v = {v}");
    }

    #[test]
    fn finite_size_revival() {
        for l in [6usize, 8, 10, 12] {
            let m = MagnonModel::new(2.0, 0.3, l).unwrap();
            // Skip the initial decay, then look for a return.
            let best = (200..20000)
                .map(|s| s as f64 * 0.01)
                .map(|t| m.excitation_density(0, t))
                .fold(0.0, f64::max);
            assert!(best > 0.5, "L = {l}: {best}");
            let t_rec = (200..20000)
                .map(|s| s as f64 * 0.01)
                .max_by(|a, b| m.m_x_profile(0, *a).abs().total_cmp(&m.m_x_profile(0, *b).abs()))
                .unwrap();
            assert!(m.m_x_profile(0, t_rec).abs() > 0.5);
        }
    }

    #[test]
    fn field_has_expected_shape() {
        let m = MagnonModel::new(2.0, -0.6, 16).unwrap();
        let f = m.field(FieldBasis::Z, 0.1, 30).unwrap();
        assert_eq!(f.steps(), 30);
        assert_eq!(f.sites(), 16);
        assert_eq!(f.values[0][0], 1.0);
    }
}

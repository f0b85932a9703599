//! Dense state-vector oracle for chains of up to 12 sites.
//!
//! Every Hamiltonian here is real in the canonical basis, so operators are stored as
//! real symmetric matrices and diagonalized once per `Propagator`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};
use crate::model::EffectiveXYModel;

pub const MAX_SITES: usize = 12;
pub const MAX_RWA_SITES: usize = 10;

/// Real symmetric operator on `n_sites` qubits, in GHz for Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub n_sites: usize,
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn expectation(&self, psi: &CVec) -> f64 {
        let (re, im) = split(psi);
        re.dot(&(&self.matrix * &re)) + im.dot(&(&self.matrix * &im))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

fn check_sites(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::Size(format!("{n} sites outside the dense limit 1..={max}")));
    }
    Ok(())
}

fn bit(b: usize, i: usize) -> bool {
    (b >> i) & 1 == 1
}

fn sz(b: usize, i: usize) -> f64 {
    if bit(b, i) {
        -1.0
    } else {
        1.0
    }
}

/// −Σ (A_i/2) σz_i + Σ (𝒥_b/2) σx_i σx_j from explicit site energies and bonds.
pub fn build_tfim_parts(site_energies: &[f64], bonds: &[(usize, usize, f64)]) -> Result<DenseOperator> {
    let n = site_energies.len();
    check_sites(n, MAX_SITES)?;
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        h[(b, b)] = -0.5 * (0..n).map(|i| site_energies[i] * sz(b, i)).sum::<f64>();
        for &(i, j, g) in bonds {
            h[(b ^ (1 << i) ^ (1 << j), b)] += 0.5 * g;
        }
    }
    Ok(DenseOperator { n_sites: n, matrix: h })
}

/// Transverse-field Ising Hamiltonian −(Δ/2)Σσz + Σ(𝒥/2)σxσx − Σ(δΔ/2)σz.
pub fn build_tfim(model: &EffectiveXYModel) -> Result<DenseOperator> {
    let a: Vec<f64> = (0..model.length).map(|i| model.site_energy(i)).collect();
    let bonds: Vec<_> = model.bonds().collect();
    build_tfim_parts(&a, &bonds)
}

/// Rotating-frame XY Hamiltonian Σ(𝒥/4)(σxσx + σyσy) − Σ(δΔ/2)σz.
pub fn build_xy(model: &EffectiveXYModel) -> Result<DenseOperator> {
    let n = model.length;
    check_sites(n, MAX_SITES)?;
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        h[(b, b)] = -0.5 * (0..n).map(|i| model.detunings[i] * sz(b, i)).sum::<f64>();
        for (i, j, g) in model.bonds() {
            if bit(b, i) != bit(b, j) {
                h[(b ^ (1 << i) ^ (1 << j), b)] += 0.5 * g;
            }
        }
    }
    Ok(DenseOperator { n_sites: n, matrix: h })
}

/// Σ σz_i as a diagonal operator.
pub fn total_sigma_z(n_sites: usize) -> DenseOperator {
    let dim = 1usize << n_sites;
    let d = DVector::from_iterator(dim, (0..dim).map(|b| (0..n_sites).map(|i| sz(b, i)).sum()));
    DenseOperator { n_sites, matrix: DMatrix::from_diagonal(&d) }
}

fn split(psi: &CVec) -> (DVector<f64>, DVector<f64>) {
    (psi.map(|z| z.re), psi.map(|z| z.im))
}

/// Cached eigendecomposition of a Hamiltonian; evolution is e^{−i2πHt}.
#[derive(Debug, Clone)]
pub struct Propagator {
    n_sites: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &DenseOperator) -> Self {
        let eig = SymmetricEigen::new(h.matrix.clone());
        Self { n_sites: h.n_sites, energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    fn check(&self, psi0: &CVec) -> Result<()> {
        if psi0.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: psi0.len() });
        }
        let norm = psi0.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("state norm {norm} ≠ 1")));
        }
        Ok(())
    }

    pub fn evolve(&self, psi0: &CVec, t: f64) -> Result<CVec> {
        Ok(self.trajectory(psi0, &[t])?.pop().expect("one time point"))
    }

    /// States at every time in `times`, sharing one projection onto the eigenbasis.
    pub fn trajectory(&self, psi0: &CVec, times: &[f64]) -> Result<Vec<CVec>> {
        self.check(psi0)?;
        let (re, im) = split(psi0);
        let vt = self.vectors.transpose();
        let cre = &vt * re;
        let cim = &vt * im;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let mut pre = DVector::zeros(self.dim());
            let mut pim = DVector::zeros(self.dim());
            for k in 0..self.dim() {
                let (s, c) = (-2.0 * PI * self.energies[k] * t).sin_cos();
                pre[k] = cre[k] * c - cim[k] * s;
                pim[k] = cre[k] * s + cim[k] * c;
            }
            let r = &self.vectors * pre;
            let i = &self.vectors * pim;
            out.push(CVec::from_iterator(self.dim(), r.iter().zip(i.iter()).map(|(&a, &b)| C64::new(a, b))));
        }
        Ok(out)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
}

/// ψ(t) = e^{−i2πHt} ψ0.
pub fn evolve_state(h: &DenseOperator, psi0: &CVec, t: f64) -> Result<CVec> {
    Propagator::new(h).evolve(psi0, t)
}

/// Computational basis state with the listed sites excited.
pub fn basis_state(n_sites: usize, excited: &[usize]) -> Result<CVec> {
    check_sites(n_sites, MAX_SITES)?;
    let mut idx = 0usize;
    for &s in excited {
        if s >= n_sites {
            return Err(Error::Validation(format!("site {s} outside chain of {n_sites}")));
        }
        idx |= 1 << s;
    }
    let mut v = CVec::zeros(1 << n_sites);
    v[idx] = C64::new(1.0, 0.0);
    Ok(v)
}

/// (1 + σx_site)|0…0⟩/√2.
pub fn plus_state(n_sites: usize, site: usize) -> Result<CVec> {
    let mut v = basis_state(n_sites, &[])?;
    if site >= n_sites {
        return Err(Error::Validation(format!("site {site} outside chain of {n_sites}")));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    v[0] = C64::new(a, 0.0);
    v[1 << site] = C64::new(a, 0.0);
    Ok(v)
}

fn sites_of(psi: &CVec) -> usize {
    psi.len().trailing_zeros() as usize
}

/// ⟨σz_i⟩ for every site.
pub fn sigma_z_expectations(psi: &CVec) -> Vec<f64> {
    let n = sites_of(psi);
    let mut out = vec![0.0; n];
    for (b, z) in psi.iter().enumerate() {
        let p = z.norm_sqr();
        for (i, o) in out.iter_mut().enumerate() {
            *o += p * sz(b, i);
        }
    }
    out
}

/// ⟨σx_i⟩ for every site.
pub fn sigma_x_expectations(psi: &CVec) -> Vec<f64> {
    let n = sites_of(psi);
    (0..n)
        .map(|i| psi.iter().enumerate().map(|(b, z)| (z.conj() * psi[b ^ (1 << i)]).re).sum())
        .collect()
}

/// Lab-frame ⟨τx_i⟩, equal to ⟨σz_i⟩ in the canonical basis.
pub fn lab_tau_x(psi: &CVec) -> Vec<f64> {
    sigma_z_expectations(psi)
}

/// Lab-frame ⟨τz_i⟩, equal to −⟨σx_i⟩ in the canonical basis.
pub fn lab_tau_z(psi: &CVec) -> Vec<f64> {
    sigma_x_expectations(psi).into_iter().map(|v| -v).collect()
}

/// ⟨Π σz_i⟩.
pub fn parity(psi: &CVec) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(b, z)| if b.count_ones() % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
        .sum()
}

/// Largest |⟨σz_i⟩_TFIM − ⟨σz_i⟩_XY| over sites and times.
pub fn rwa_error(model: &EffectiveXYModel, psi0: &CVec, t_grid: &[f64]) -> Result<f64> {
    check_sites(model.length, MAX_RWA_SITES)?;
    let full = Propagator::new(&build_tfim(model)?).trajectory(psi0, t_grid)?;
    let rwa = Propagator::new(&build_xy(model)?).trajectory(psi0, t_grid)?;
    let mut worst = 0.0f64;
    for (a, b) in full.iter().zip(&rwa) {
        for (x, y) in sigma_z_expectations(a).iter().zip(sigma_z_expectations(b)) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn single_site_levels() {
        let m = EffectiveXYModel::new(1.7, vec![0.0], vec![], false).unwrap();
        assert!(close(&build_tfim(&m).unwrap().eigenvalues(), &[-0.85, 0.85], 1e-14));
    }

    #[test]
    fn xx_pair_spectrum() {
        let h = build_tfim_parts(&[0.0, 0.0], &[(0, 1, 0.8)]).unwrap();
        assert!(close(&h.eigenvalues(), &[-0.4, -0.4, 0.4, 0.4], 1e-14));
    }

    #[test]
    fn size_limit() {
        let m = EffectiveXYModel::clean(13, 1.0, 0.1, true).unwrap();
        assert!(matches!(build_tfim(&m), Err(Error::Size(_))));
        assert!(matches!(build_xy(&m), Err(Error::Size(_))));
    }

    #[test]
    fn xy_conserves_excitations() {
        let m = EffectiveXYModel::new(2.0, vec![0.1, -0.3, 0.05, 0.2, -0.1], vec![0.3, -0.2, 0.4, 0.1, 0.25], true).unwrap();
        let h = build_xy(&m).unwrap().matrix;
        let z = total_sigma_z(5).matrix;
        assert!((&h * &z - &z * &h).amax() < 1e-12);
    }

    #[test]
    fn exchange_pair_spectrum() {
        let m = EffectiveXYModel::clean(2, 1.0, 0.3, false).unwrap();
        assert!(close(&build_xy(&m).unwrap().eigenvalues(), &[-0.15, 0.0, 0.0, 0.15], 1e-14));
    }

    #[test]
    fn single_excitation_band() {
        let l = 6;
        let j = -0.45;
        let m = EffectiveXYModel::clean(l, 2.0, j, true).unwrap();
        let h = build_xy(&m).unwrap().matrix;
        let idx: Vec<usize> = (0..l).map(|i| 1 << i).collect();
        let block = DMatrix::from_fn(l, l, |a, b| h[(idx[a], idx[b])]);
        // Zero detunings leave a constant −(L−2)/2·0 = 0 offset in this block.
        let mut e: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = crate::model::momentum_grid(l).iter().map(|k| j * k.cos()).collect();
        want.sort_by(f64::total_cmp);
        assert!(close(&e, &want, 1e-12));
    }

    #[test]
    fn trivial_evolutions() {
        let m = EffectiveXYModel::new(1.0, vec![0.2, -0.1, 0.3], vec![0.0, 0.0], false).unwrap();
        let h = build_tfim(&m).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = CVec::zeros(8);
        psi[1] = C64::new(a, 0.0);
        psi[6] = C64::new(0.0, a);
        let at0 = evolve_state(&h, &psi, 0.0).unwrap();
        assert!((&at0 - &psi).norm() < 1e-14);
        let later = evolve_state(&h, &psi, 3.7).unwrap();
        for b in 0..8 {
            assert!((later[b].norm_sqr() - psi[b].norm_sqr()).abs() < 1e-14);
        }
        assert!((later.norm() - 1.0).abs() < 1e-12);
        assert!(evolve_state(&h, &CVec::zeros(4), 1.0).is_err());
    }

    #[test]
    fn pair_swap_time() {
        let j = 0.3;
        let m = EffectiveXYModel::clean(2, 1.0, j, false).unwrap();
        let prop = Propagator::new(&build_xy(&m).unwrap());
        let psi0 = basis_state(2, &[0]).unwrap();
        for k in 0..40 {
            let t = k as f64 * 0.1;
            let p01 = prop.evolve(&psi0, t).unwrap()[2].norm_sqr();
            assert!((p01 - (PI * j * t).sin().powi(2)).abs() < 1e-12);
        }
        let swapped = prop.evolve(&psi0, 1.0 / (2.0 * j)).unwrap();
        assert!((swapped[2].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conservation_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let l = 6;
        let det: Vec<f64> = (0..l).map(|_| rng.random_range(-0.2..0.2)).collect();
        let cpl: Vec<f64> = (0..l).map(|_| rng.random_range(-0.5..0.5)).collect();
        let m = EffectiveXYModel::new(2.0, det, cpl, true).unwrap();
        let psi0 = plus_state(l, 2).unwrap();
        let psi1 = basis_state(l, &[0, 3]).unwrap();
        for (h, is_xy) in [(build_tfim(&m).unwrap(), false), (build_xy(&m).unwrap(), true)] {
            let prop = Propagator::new(&h);
            let e0 = h.expectation(&psi0);
            let n0: f64 = sigma_z_expectations(&psi1).iter().sum();
            let p0 = parity(&psi1);
            for k in 1..10 {
                let t = 0.77 * k as f64;
                let psi = prop.evolve(&psi0, t).unwrap();
                assert!((h.expectation(&psi) - e0).abs() < 1e-10);
                let chi = prop.evolve(&psi1, t).unwrap();
                if is_xy {
                    let n: f64 = sigma_z_expectations(&chi).iter().sum();
                    assert!((n - n0).abs() < 1e-10);
                } else {
                    assert!((parity(&chi) - p0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn lab_basis_names() {
        let psi = plus_state(3, 1).unwrap();
        assert!(close(&lab_tau_z(&psi), &[0.0, -1.0, 0.0], 1e-14));
        assert!(close(&lab_tau_x(&psi), &[1.0, 0.0, 1.0], 1e-14));
    }

    #[test]
    fn rwa_exact_without_coupling() {
        let m = EffectiveXYModel::new(1.5, vec![0.1, -0.2, 0.05], vec![0.0, 0.0], false).unwrap();
        let psi = plus_state(3, 0).unwrap();
        let ts: Vec<f64> = (0..50).map(|k| 0.2 * k as f64).collect();
        assert!(rwa_error(&m, &psi, &ts).unwrap() <= 1e-10);
    }

    #[test]
    fn rwa_pair_baseline() {
        let m = EffectiveXYModel::clean(2, 1.0, 0.3, false).unwrap();
        let psi = basis_state(2, &[0]).unwrap();
        let ts: Vec<f64> = (0..=200).map(|k| 0.05 * k as f64).collect();
        let err = rwa_error(&m, &psi, &ts).unwrap();
        assert!((err - RWA_PAIR_BASELINE).abs() < 1e-9, "rwa error {err}");
    }

    const RWA_PAIR_BASELINE: f64 = 0.0;
}

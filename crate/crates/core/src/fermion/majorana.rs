//! Exact σx-basis correlations of the quadratic chain.
//!
//! The field ⟨σx_n(t)⟩ after preparing (1 + σx_0)|0…0⟩/√2 is Re G with
//! G = ⟨0|e^{i2πH_A t} σx_n e^{−i2πH_P t} σx_0|0⟩, which mixes the two parity sectors.
//! Both sectors are Gaussian, so G reduces to a vacuum overlap times a Pfaffian.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

use super::bdg::{BdGSystem, ParitySector};
use crate::error::{Error, Result};
use crate::linalg::{pfaffian, CMat, C64, I};

/// Majorana generator h with H = (i/4) Σ h_ab w_a w_b, w_2j = c_j + c_j†, w_2j+1 = i(c_j† − c_j).
pub fn majorana_generator(system: &BdGSystem, parity: ParitySector) -> DMatrix<f64> {
    let l = system.len();
    let mut h = DMatrix::zeros(2 * l, 2 * l);
    for (i, &a) in system.site_energies.iter().enumerate() {
        h[(2 * i, 2 * i + 1)] = a;
    }
    for (i, j, g, boundary) in system.bonds() {
        if boundary {
            let p = match parity {
                ParitySector::Even => 1.0,
                ParitySector::Odd => -1.0,
            };
            h[(2 * i + 1, 2 * j)] += p * g;
        } else {
            h[(2 * i + 1, 2 * j)] -= g;
        }
    }
    &h - h.transpose()
}

/// R(t) = exp(2π h t) for every sector generator, via one Hermitian eigendecomposition.
struct Rotation {
    vectors: CMat,
    values: Vec<f64>,
}

impl Rotation {
    fn new(h: &DMatrix<f64>) -> Self {
        let ih = h.map(|x| C64::new(0.0, x));
        let eig = SymmetricEigen::new(ih);
        Self { vectors: eig.eigenvectors, values: eig.eigenvalues.iter().copied().collect() }
    }

    fn at(&self, t: f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from_polar(1.0, -2.0 * PI * self.values[j] * t);
        }
        (scaled * self.vectors.adjoint()).map(|z| z.re)
    }
}

/// Evaluates ⟨σx_n(t)⟩ for all sites of a chain prepared with site 0 along +x.
pub struct XBasisEngine {
    length: usize,
    even: Rotation,
    odd: Rotation,
}

impl XBasisEngine {
    pub fn new(system: &BdGSystem) -> Self {
        Self {
            length: system.len(),
            even: Rotation::new(&majorana_generator(system, ParitySector::Even)),
            odd: Rotation::new(&majorana_generator(system, ParitySector::Odd)),
        }
    }

    /// Vacuum overlap candidates ±sqrt(det P*) and the correlation pieces at time t.
    fn kernel(&self, t: f64) -> Result<(C64, DMatrix<f64>, CMat)> {
        let l = self.length;
        let r_odd = self.odd.at(t);
        let q = self.even.at(-t) * &r_odd;
        let x = CMat::from_fn(l, 2 * l, |i, b| C64::new(q[(2 * i, b)], q[(2 * i + 1, b)]));
        let p = CMat::from_fn(l, l, |i, j| (x[(i, 2 * j)] - I * x[(i, 2 * j + 1)]) * 0.5);
        let qc = CMat::from_fn(l, l, |i, j| (x[(i, 2 * j)] + I * x[(i, 2 * j + 1)]) * 0.5);
        let det = p.map(|z| z.conj()).determinant();
        let lu = p.lu();
        let z = -lu
            .solve(&qc)
            .ok_or_else(|| Error::Accuracy(format!("vacuum overlap vanishes at t = {t}")))?;
        // Contraction ⟨w_a w_b⟩ against the rotated vacuum.
        let mut contraction = CMat::zeros(2 * l, 2 * l);
        let zc = z.map(|v| v.conj());
        let td = |a: usize, j: usize| -> C64 {
            if a / 2 != j {
                C64::new(0.0, 0.0)
            } else if a.is_multiple_of(2) {
                C64::new(1.0, 0.0)
            } else {
                I
            }
        };
        let tc = |a: usize| -> C64 { if a.is_multiple_of(2) { C64::new(1.0, 0.0) } else { -I } };
        for a in 0..2 * l {
            for b in 0..2 * l {
                let mut v = if a / 2 == b / 2 { tc(a) * td(b, a / 2) } else { C64::new(0.0, 0.0) };
                v += td(a, a / 2) * zc[(a / 2, b / 2)] * td(b, b / 2);
                contraction[(a, b)] = v;
            }
        }
        Ok((det, r_odd, contraction))
    }

    /// m_x(n, t) for all n at every time in `times` (non-negative, any order).
    pub fn field(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Domain("times must be finite and non-negative".into()));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut out = vec![Vec::new(); times.len()];
        let mut t_prev = 0.0;
        let mut f_prev = C64::new(1.0, 0.0);
        for idx in order {
            let t = times[idx];
            f_prev = self.track_overlap(t_prev, f_prev, t, 0)?;
            t_prev = t;
            out[idx] = self.profile(t, f_prev)?;
        }
        Ok(out)
    }

    /// Continues the branch of sqrt(det P*) from (t0, f0) to t1.
    fn track_overlap(&self, t0: f64, f0: C64, t1: f64, depth: u32) -> Result<C64> {
        if t1 == t0 {
            return Ok(f0);
        }
        let (det, _, _) = self.kernel(t1)?;
        let root = det.sqrt();
        let cand = if (root - f0).norm() <= (-root - f0).norm() { root } else { -root };
        let turn = (cand / f0).arg().abs();
        if turn < 0.5 {
            return Ok(cand);
        }
        if depth > 40 {
            return Err(Error::Accuracy("overlap phase could not be tracked".into()));
        }
        let mid = 0.5 * (t0 + t1);
        let fm = self.track_overlap(t0, f0, mid, depth + 1)?;
        self.track_overlap(mid, fm, t1, depth + 1)
    }

    fn profile(&self, t: f64, f: C64) -> Result<Vec<f64>> {
        let l = self.length;
        let (_, r_odd, contraction) = self.kernel(t)?;
        // Rows: w_a(t) for a = 0..2L under the odd-sector dynamics, then w_0.
        let mut s = CMat::zeros(2 * l + 1, 2 * l);
        for a in 0..2 * l {
            for b in 0..2 * l {
                s[(a, b)] = C64::new(r_odd[(a, b)], 0.0);
            }
        }
        s[(2 * l, 0)] = C64::new(1.0, 0.0);
        let k = &s * contraction * s.transpose();
        let mut out = Vec::with_capacity(l);
        for n in 0..l {
            let idx: Vec<usize> = (0..=2 * n).chain(std::iter::once(2 * l)).collect();
            let m = idx.len();
            let mut a = CMat::zeros(m, m);
            for p in 0..m {
                for q in p + 1..m {
                    a[(p, q)] = k[(idx[p], idx[q])];
                    a[(q, p)] = -a[(p, q)];
                }
            }
            let phase = match n % 4 {
                0 => C64::new(1.0, 0.0),
                1 => -I,
                2 => C64::new(-1.0, 0.0),
                _ => I,
            };
            out.push((phase * f * pfaffian(&a)).re);
        }
        Ok(out)
    }
}

/// ⟨σx_n(t)⟩ after (1 + σx_source)|0…0⟩/√2, as rows over time.
pub fn x_basis_field(system: &BdGSystem, source: usize, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let l = system.len();
    if source >= l {
        return Err(Error::Validation(format!("source site {source} outside chain of {l}")));
    }
    if source == 0 {
        return XBasisEngine::new(system).field(times);
    }
    if !system.periodic {
        return Err(Error::Validation("open chains support the source at site 0 only".into()));
    }
    // Relabel so the source becomes site 0; the spin model is translation covariant.
    let rotated = BdGSystem::new(
        (0..l).map(|i| system.site_energies[(i + source) % l]).collect(),
        (0..l).map(|i| system.couplings[(i + source) % l]).collect(),
        true,
    )?;
    let rows = XBasisEngine::new(&rotated).field(times)?;
    Ok(rows
        .into_iter()
        .map(|r| (0..l).map(|n| r[(n + l - source) % l]).collect())
        .collect())
}

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::model::EffectiveXYModel;

/// Fermion-parity sector of a periodic chain. `Even` (P = +1) gives antiperiodic
/// fermion boundary conditions, `Odd` (P = −1) periodic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParitySector {
    #[default]
    Even,
    Odd,
}

impl ParitySector {
    pub fn of_count(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Self::Even
        } else {
            Self::Odd
        }
    }

    /// Sign applied to the boundary-spanning bond relative to an interior bond.
    pub(crate) fn boundary_sign(self) -> f64 {
        match self {
            Self::Even => -1.0,
            Self::Odd => 1.0,
        }
    }
}

/// Quadratic chain −Σ(A_i/2)σz_i + Σ(J_i/2)σx_iσx_{i+1}; energies in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdGSystem {
    pub site_energies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub periodic: bool,
    pub parity: ParitySector,
}

impl BdGSystem {
    pub fn new(site_energies: Vec<f64>, couplings: Vec<f64>, periodic: bool) -> Result<Self> {
        let l = site_energies.len();
        if l < 2 {
            return Err(Error::Validation("BdG chains need at least 2 sites".into()));
        }
        let bonds = if periodic { l } else { l - 1 };
        if couplings.len() != bonds {
            return Err(Error::Validation(format!("expected {bonds} couplings, found {}", couplings.len())));
        }
        if site_energies.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite BdG parameter".into()));
        }
        Ok(Self { site_energies, couplings, periodic, parity: ParitySector::Even })
    }

    pub fn from_model(model: &EffectiveXYModel) -> Result<Self> {
        Self::new(
            (0..model.length).map(|i| model.site_energy(i)).collect(),
            model.couplings.clone(),
            model.periodic,
        )
    }

    pub fn clean(length: usize, delta: f64, coupling: f64) -> Result<Self> {
        Self::new(vec![delta; length], vec![coupling; length], true)
    }

    pub fn with_parity(mut self, parity: ParitySector) -> Self {
        self.parity = parity;
        self
    }

    pub fn len(&self) -> usize {
        self.site_energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_energies.is_empty()
    }

    /// Bonds as (i, j, J, boundary) with j = i + 1 mod L.
    pub(crate) fn bonds(&self) -> impl Iterator<Item = (usize, usize, f64, bool)> + '_ {
        let l = self.len();
        self.couplings
            .iter()
            .enumerate()
            .map(move |(i, &j)| (i, (i + 1) % l, j, i + 1 == l))
    }
}

/// Real symmetric 2L×2L matrix [[Ah, B], [−B, −Ah]] acting on (u; v).
pub fn build_bdg(system: &BdGSystem) -> DMatrix<f64> {
    let l = system.len();
    let mut ah = DMatrix::zeros(l, l);
    let mut b = DMatrix::zeros(l, l);
    for (i, &a) in system.site_energies.iter().enumerate() {
        ah[(i, i)] = a;
    }
    for (i, j, g, boundary) in system.bonds() {
        let s = if boundary { system.parity.boundary_sign() } else { 1.0 };
        let half = 0.5 * s * g;
        ah[(i, j)] += half;
        ah[(j, i)] += half;
        b[(i, j)] += half;
        b[(j, i)] -= half;
    }
    let mut m = DMatrix::zeros(2 * l, 2 * l);
    m.view_mut((0, 0), (l, l)).copy_from(&ah);
    m.view_mut((0, l), (l, l)).copy_from(&b);
    m.view_mut((l, 0), (l, l)).copy_from(&(-&b));
    m.view_mut((l, l), (l, l)).copy_from(&(-&ah));
    m
}

/// Bogoliubov coefficients; column μ of (u; v) is one quasiparticle mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BdGState {
    pub u: CMat,
    pub v: CMat,
}

impl BdGState {
    pub fn len(&self) -> usize {
        self.u.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.u.nrows() == 0
    }

    /// Block matrix [[u, v*], [v, u*]], unitary for any physical state.
    pub fn block(&self) -> CMat {
        let l = self.len();
        let mut w = CMat::zeros(2 * l, 2 * l);
        w.view_mut((0, 0), (l, l)).copy_from(&self.u);
        w.view_mut((0, l), (l, l)).copy_from(&self.v.map(|z| z.conj()));
        w.view_mut((l, 0), (l, l)).copy_from(&self.v);
        w.view_mut((l, l), (l, l)).copy_from(&self.u.map(|z| z.conj()));
        w
    }

    pub fn unitarity_defect(&self) -> f64 {
        let w = self.block();
        let id = CMat::identity(w.nrows(), w.ncols());
        (w.adjoint() * &w - id).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.v.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
    }
}

/// π-pulse product state: excited sites start with v_ii = 1, the rest with u_ii = 1.
pub fn init_pi_pulses(system: &BdGSystem, excited_sites: &[usize]) -> Result<BdGState> {
    let l = system.len();
    let mut flags = vec![false; l];
    for &s in excited_sites {
        if s >= l {
            return Err(Error::Validation(format!("site {s} outside chain of {l}")));
        }
        if flags[s] {
            return Err(Error::Validation(format!("site {s} listed twice")));
        }
        flags[s] = true;
    }
    if system.periodic && ParitySector::of_count(excited_sites.len()) != system.parity {
        return Err(Error::Parity(format!(
            "{} excitations do not belong to the {:?} parity sector",
            excited_sites.len(),
            system.parity
        )));
    }
    let mut u = CMat::zeros(l, l);
    let mut v = CMat::zeros(l, l);
    for (i, &f) in flags.iter().enumerate() {
        if f {
            v[(i, i)] = C64::new(1.0, 0.0);
        } else {
            u[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    Ok(BdGState { u, v })
}

/// τx_i = 1 − 2 Σ_μ |v_iμ|².
pub fn measure_tau_x(state: &BdGState) -> Vec<f64> {
    state.occupations().into_iter().map(|n| 1.0 - 2.0 * n).collect()
}

/// One-time eigendecomposition of the BdG matrix, reused for every evolution time.
#[derive(Debug, Clone)]
pub struct BdGPropagator {
    length: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl BdGPropagator {
    pub fn new(system: &BdGSystem) -> Self {
        Self::from_matrix(&build_bdg(system))
    }

    pub fn from_matrix(h_bdg: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h_bdg.clone());
        Self { length: h_bdg.nrows() / 2, energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Non-negative single-particle energies, ascending.
    pub fn positive_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.energies.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e.split_off(self.length)
    }

    /// Projection of (u; v)(0) onto the eigenbasis, ready for repeated readout.
    pub fn prepare(&self, state: &BdGState) -> Result<PreparedState<'_>> {
        let l = self.length;
        if state.len() != l {
            return Err(Error::Dimension { expected: l, got: state.len() });
        }
        let mut x_re = DMatrix::zeros(2 * l, l);
        let mut x_im = DMatrix::zeros(2 * l, l);
        for i in 0..l {
            for j in 0..l {
                x_re[(i, j)] = state.u[(i, j)].re;
                x_im[(i, j)] = state.u[(i, j)].im;
                x_re[(l + i, j)] = state.v[(i, j)].re;
                x_im[(l + i, j)] = state.v[(i, j)].im;
            }
        }
        let vt = self.vectors.transpose();
        let w_re = &vt * x_re;
        let w_im = if x_im.iter().all(|&z| z == 0.0) { None } else { Some(&vt * x_im) };
        Ok(PreparedState { prop: self, w_re, w_im })
    }

    /// (u; v)(t) = e^{−i2πHt}(u; v)(0).
    pub fn evolve(&self, state: &BdGState, t: f64) -> Result<BdGState> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("evolution time {t} must be non-negative")));
        }
        Ok(self.prepare(state)?.state_at(t))
    }
}

/// Initial state expressed in the eigenbasis of a `BdGPropagator`.
#[derive(Debug, Clone)]
pub struct PreparedState<'a> {
    prop: &'a BdGPropagator,
    w_re: DMatrix<f64>,
    w_im: Option<DMatrix<f64>>,
}

impl PreparedState<'_> {
    /// Real and imaginary parts of the rows `rows` of (u; v)(t).
    fn block_at(&self, t: f64, rows: std::ops::Range<usize>) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.prop.energies.len();
        let (sin, cos): (Vec<f64>, Vec<f64>) =
            self.prop.energies.iter().map(|&e| (2.0 * PI * e * t).sin_cos()).unzip();
        let basis = self.prop.vectors.rows(rows.start, rows.len());
        let mut a = self.w_re.clone();
        let mut b = self.w_re.clone();
        for k in 0..n {
            let (c, s) = (cos[k], sin[k]);
            a.row_mut(k).scale_mut(c);
            b.row_mut(k).scale_mut(-s);
        }
        if let Some(wi) = &self.w_im {
            for k in 0..n {
                let (c, s) = (cos[k], sin[k]);
                for j in 0..wi.ncols() {
                    a[(k, j)] += s * wi[(k, j)];
                    b[(k, j)] += c * wi[(k, j)];
                }
            }
        }
        (basis * a, basis * b)
    }

    pub fn state_at(&self, t: f64) -> BdGState {
        let l = self.prop.length;
        let (re, im) = self.block_at(t, 0..2 * l);
        let full = CMat::from_fn(2 * l, l, |i, j| C64::new(re[(i, j)], im[(i, j)]));
        BdGState { u: full.rows(0, l).into_owned(), v: full.rows(l, l).into_owned() }
    }

    pub fn occupations_at(&self, t: f64) -> Vec<f64> {
        let l = self.prop.length;
        let (re, im) = self.block_at(t, l..2 * l);
        (0..l)
            .map(|i| re.row(i).iter().chain(im.row(i).iter()).map(|x| x * x).sum())
            .collect()
    }

    pub fn tau_x_at(&self, t: f64) -> Vec<f64> {
        self.occupations_at(t).into_iter().map(|n| 1.0 - 2.0 * n).collect()
    }

    /// Precomputes Σ_{i∈sites} n_i(t) for repeated evaluation in O(L²) per time.
    pub fn site_set_readout(&self, sites: &[usize]) -> Result<SiteSetReadout> {
        let l = self.prop.length;
        if let Some(&bad) = sites.iter().find(|&&i| i >= l) {
            return Err(Error::Dimension { expected: l, got: bad + 1 });
        }
        let n = 2 * l;
        let b = DMatrix::from_fn(sites.len(), n, |r, k| self.prop.vectors[(l + sites[r], k)]);
        let g = b.transpose() * &b;
        let (c_re, c_im) = match &self.w_im {
            None => (&self.w_re * self.w_re.transpose(), DMatrix::zeros(n, n)),
            Some(wi) => (
                &self.w_re * self.w_re.transpose() + wi * wi.transpose(),
                wi * self.w_re.transpose() - &self.w_re * wi.transpose(),
            ),
        };
        Ok(SiteSetReadout {
            energies: self.prop.energies.clone(),
            m_re: g.component_mul(&c_re),
            m_im: g.component_mul(&c_im),
        })
    }
}

/// Σ_{i∈S} n_i(t) = Σ_{kk'} G_kk' Re(e^{−i2π(E_k − E_k')t} C_kk'), G = B_SᵀB_S, C = WW†.
#[derive(Debug, Clone)]
pub struct SiteSetReadout {
    energies: DVector<f64>,
    m_re: DMatrix<f64>,
    m_im: DMatrix<f64>,
}

impl SiteSetReadout {
    pub fn at(&self, t: f64) -> f64 {
        let (sin, cos): (Vec<f64>, Vec<f64>) = self.energies.iter().map(|&e| (2.0 * PI * e * t).sin_cos()).unzip();
        let n = cos.len();
        let mut total = 0.0;
        for kp in 0..n {
            let (re, im) = (self.m_re.column(kp), self.m_im.column(kp));
            // Σ_k e^{−iθ_k} M_{k,k'} for fixed k'
            let (mut ar, mut ai) = (0.0, 0.0);
            for k in 0..n {
                let (c, s) = (cos[k], sin[k]);
                ar += c * re[k] + s * im[k];
                ai += c * im[k] - s * re[k];
            }
            total += ar * cos[kp] - ai * sin[kp];
        }
        total
    }
}

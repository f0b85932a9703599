//! Superoperator model of detector-qubit readout.
//!
//! Density matrices are vectorized row-major, vec(ρ)[i·d + j] = ρ_ij, so
//! vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ) and unitary evolution is U ⊗ U*.
//! Subsystems are ordered target first, detector second (targets before detectors
//! for multi-pair models); the first factor is the most significant index.
//! All spin operators here are lab-frame τ matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{identity2, kron_all, max_abs, sigma_x, sigma_y, sigma_z, unitary_step, CMat, C64};
use crate::model::AnnealSchedule;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn vectorize(rho: &CMat) -> Vec<C64> {
    let d = rho.nrows();
    (0..d * d).map(|x| rho[(x / d, x % d)]).collect()
}

pub fn unvectorize(v: &[C64]) -> Result<CMat> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::Dimension { expected: d * d, got: v.len() });
    }
    Ok(CMat::from_fn(d, d, |i, j| v[i * d + j]))
}

/// Linear map between vectorized operator spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub matrix: CMat,
}

impl Superoperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        for n in [matrix.nrows(), matrix.ncols()] {
            let d = (n as f64).sqrt().round() as usize;
            if d * d != n || n == 0 {
                return Err(Error::Dimension { expected: d * d, got: n });
            }
        }
        Ok(Self { matrix })
    }

    pub fn dim_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.matrix.nrows()
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &Superoperator) -> Result<Superoperator> {
        if self.dim_in() != inner.dim_out() {
            return Err(Error::Dimension { expected: self.dim_in(), got: inner.dim_out() });
        }
        Ok(Superoperator { matrix: &self.matrix * &inner.matrix })
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let v = vectorize(rho);
        if v.len() != self.dim_in() {
            return Err(Error::Dimension { expected: self.dim_in(), got: v.len() });
        }
        let out = &self.matrix * nalgebra::DVector::from_vec(v);
        unvectorize(out.as_slice())
    }

    /// Largest deviation from vec(I_out)ᵀ S = vec(I_in)ᵀ.
    pub fn trace_defect(&self) -> f64 {
        let d_out = (self.dim_out() as f64).sqrt().round() as usize;
        let d_in = (self.dim_in() as f64).sqrt().round() as usize;
        (0..self.dim_in())
            .map(|c| {
                let s: C64 = (0..d_out).map(|i| self.matrix[(i * d_out + i, c)]).sum();
                let want = if c / d_in == c % d_in { 1.0 } else { 0.0 };
                (s - want).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// ½ Σ |ijkl⟩⟨ik|: target (i, k) in, target ⊗ |+⟩⟨+| out.
pub fn s_prep() -> Superoperator {
    let mut m = CMat::zeros(16, 4);
    for (i, j, k, l) in itertools4() {
        m[(i * 8 + j * 4 + k * 2 + l, i * 2 + k)] = C64::new(0.5, 0.0);
    }
    Superoperator { matrix: m }
}

/// Σ |jl⟩⟨ijil|: trace out the target.
pub fn s_ptrace() -> Superoperator {
    let mut m = CMat::zeros(4, 16);
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                m[(j * 2 + l, i * 8 + j * 4 + i * 2 + l)] = one();
            }
        }
    }
    Superoperator { matrix: m }
}

/// Σ |ii⟩⟨ii|.
pub fn s_dephasing() -> Superoperator {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = one();
    m[(3, 3)] = one();
    Superoperator { matrix: m }
}

fn itertools4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|x| (x >> 3 & 1, x >> 2 & 1, x >> 1 & 1, x & 1))
}

/// U ρ U† in the row-major convention.
pub fn s_prop_from_unitary(u: &CMat) -> Superoperator {
    Superoperator { matrix: u.kronecker(&u.map(|z| z.conj())) }
}

/// Hamiltonian as a function of time, in GHz.
pub trait HamiltonianPath {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> Result<CMat>;
    /// Time-independent paths are integrated exactly in one step.
    fn is_static(&self) -> bool {
        false
    }
}

/// A fixed Hamiltonian.
pub struct StaticHamiltonian(pub CMat);

impl HamiltonianPath for StaticHamiltonian {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn at(&self, _t: f64) -> Result<CMat> {
        Ok(self.0.clone())
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// Gershgorin bound on the spectral radius.
pub fn energy_bound(h: &CMat) -> f64 {
    h.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn checked_hamiltonian(path: &dyn HamiltonianPath, t: f64, dt: f64) -> Result<CMat> {
    let h = path.at(t)?;
    if hermiticity_defect(&h) > 1e-12 {
        return Err(Error::Validation("Hamiltonian is not Hermitian".into()));
    }
    let e = energy_bound(&h);
    if !path.is_static() && dt * 40.0 * e > 1.0 + 1e-12 {
        return Err(Error::Accuracy(format!("step {dt} ns exceeds 1/(40·{e:.3} GHz)")));
    }
    Ok(h)
}

/// Ordered product of short-step exponentials over the intervals of `t_grid`.
/// Each interval uses the fourth-order two-exponential commutator-free rule
/// with Hamiltonians sampled at the Gauss points.
pub fn time_ordered_propagator(path: &dyn HamiltonianPath, t_grid: &[f64]) -> Result<CMat> {
    if t_grid.len() < 2 {
        return Err(Error::Validation("time grid needs at least two points".into()));
    }
    let r = 3f64.sqrt() / 6.0;
    let (a1, a2) = (C64::new(0.25 + r, 0.0), C64::new(0.25 - r, 0.0));
    let mut u = CMat::identity(path.dim(), path.dim());
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        if !(dt > 0.0) {
            return Err(Error::Validation("time grid must increase".into()));
        }
        if path.is_static() {
            u = unitary_step(&checked_hamiltonian(path, w[0], dt)?, dt) * u;
            continue;
        }
        let early = checked_hamiltonian(path, w[0] + (0.5 - r) * dt, dt)?;
        let late = checked_hamiltonian(path, w[0] + (0.5 + r) * dt, dt)?;
        let first = &early * a1 + &late * a2;
        let second = &early * a2 + &late * a1;
        u = unitary_step(&second, dt) * unitary_step(&first, dt) * u;
    }
    Ok(u)
}

fn hermiticity_defect(h: &CMat) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn s_prop(path: &dyn HamiltonianPath, t_grid: &[f64]) -> Result<Superoperator> {
    Ok(s_prop_from_unitary(&time_ordered_propagator(path, t_grid)?))
}

/// Uniform-step propagator over [0, duration], halving the step until successive
/// results agree to `tol`.
pub fn converged_propagator(path: &dyn HamiltonianPath, duration: f64, tol: f64) -> Result<CMat> {
    if !(duration > 0.0) {
        return Err(Error::Validation("duration must be positive".into()));
    }
    let probe = (0..=16)
        .map(|k| path.at(duration * k as f64 / 16.0).map(|h| energy_bound(&h)))
        .collect::<Result<Vec<_>>>()?;
    let e = probe.into_iter().fold(0.0, f64::max).max(1e-9);
    let mut steps = if path.is_static() { 1 } else { (duration * 40.0 * e * 1.25).ceil() as usize };
    let grid = |n: usize| -> Vec<f64> { (0..=n).map(|k| duration * k as f64 / n as f64).collect() };
    let mut u = time_ordered_propagator(path, &grid(steps))?;
    if path.is_static() {
        return Ok(u);
    }
    for _ in 0..12 {
        steps *= 2;
        let finer = time_ordered_propagator(path, &grid(steps))?;
        let change = max_abs(&(&finer - &u));
        u = finer;
        if change < tol {
            return Ok(u);
        }
    }
    Err(Error::Accuracy("time-ordered product did not converge".into()))
}

/// Direction and norm of the (ZX, ZY, ZZ) Pauli-transfer row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutAxis {
    pub theta: f64,
    pub phi: f64,
    pub fidelity: f64,
    pub vector: [f64; 3],
}

impl ReadoutAxis {
    pub fn from_vector(vector: [f64; 3]) -> Result<Self> {
        let f = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if f > 1.0 + 1e-6 {
            return Err(Error::Physicality(format!("readout fidelity {f} exceeds 1")));
        }
        let (theta, phi) = if f > 1e-14 {
            ((vector[2] / f).clamp(-1.0, 1.0).acos(), vector[1].atan2(vector[0]))
        } else {
            (0.0, 0.0)
        };
        Ok(Self { theta, phi, fidelity: f, vector })
    }
}

/// R_Zb = ½ Tr(Z S(P_b)) for b = X, Y, Z.
pub fn readout_axis(s_tot: &Superoperator) -> Result<ReadoutAxis> {
    if s_tot.dim_in() != 4 || s_tot.dim_out() != 4 {
        return Err(Error::Dimension { expected: 4, got: s_tot.dim_in().max(s_tot.dim_out()) });
    }
    let z = sigma_z();
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip([sigma_x(), sigma_y(), sigma_z()]) {
        let out = s_tot.apply(&p)?;
        *slot = 0.5 * (&z * out).trace().re;
    }
    ReadoutAxis::from_vector(v)
}

/// s_dephasing · s_ptrace · s_prop · s_prep for a target–detector unitary.
pub fn total_channel(u: &CMat) -> Result<Superoperator> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::Dimension { expected: 4, got: u.nrows() });
    }
    s_dephasing().compose(&s_ptrace())?.compose(&s_prop_from_unitary(u))?.compose(&s_prep())
}

/// Detector quench: targets held at `s_target`, detectors ramped linearly from
/// s = 0 to 1 over `ramp_ns`, optionally held at s = 1 for `hold_ns`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSpec {
    pub s_target: f64,
    #[serde(default = "default_ramp")]
    pub ramp_ns: f64,
    #[serde(default)]
    pub hold_ns: f64,
    /// Dimensionless target–detector coupler value J_td.
    #[serde(default = "default_coupling")]
    pub coupling_td: f64,
    /// Dimensionless detector tilt h_d, scaled by B(s_d).
    #[serde(default)]
    pub tilt: f64,
}

fn default_ramp() -> f64 {
    2.0
}

fn default_coupling() -> f64 {
    -1.0
}

impl QuenchSpec {
    /// Target parked where A(s) = 2 GHz on the given schedule.
    pub fn default_for(schedule: &AnnealSchedule) -> Result<Self> {
        Ok(Self { s_target: schedule.solve_a(2.0)?, ramp_ns: 2.0, hold_ns: 0.0, coupling_td: -1.0, tilt: 0.0 })
    }

    pub fn duration(&self) -> f64 {
        self.ramp_ns + self.hold_ns
    }

    fn validate(&self) -> Result<()> {
        if !(self.ramp_ns > 0.0 && self.hold_ns >= 0.0) {
            return Err(Error::Validation("quench ramp must be positive and hold non-negative".into()));
        }
        if ![self.s_target, self.coupling_td, self.tilt].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("non-finite quench parameter".into()));
        }
        Ok(())
    }
}

/// H(t) for `pairs` target–detector pairs (targets first), with an optional
/// (𝒥_tt/2) τz τz coupling between the first two targets.
pub struct QuenchPath<'a> {
    schedule: &'a AnnealSchedule,
    spec: QuenchSpec,
    pairs: usize,
    target_coupling: f64,
    a_t: f64,
    b_t: f64,
    ops: Vec<[CMat; 2]>,
    zz_tt: Option<CMat>,
    zz_td: Vec<CMat>,
}

fn embed(op: &CMat, pos: usize, n: usize) -> CMat {
    let ops: Vec<CMat> = (0..n).map(|s| if s == pos { op.clone() } else { identity2() }).collect();
    kron_all(&ops)
}

impl<'a> QuenchPath<'a> {
    pub fn new(schedule: &'a AnnealSchedule, spec: QuenchSpec, pairs: usize, target_coupling: f64) -> Result<Self> {
        spec.validate()?;
        if pairs == 0 || pairs > 2 {
            return Err(Error::Validation(format!("{pairs} target-detector pairs not supported")));
        }
        let n = 2 * pairs;
        let a_t = schedule.a(spec.s_target)?;
        let b_t = schedule.b(spec.s_target)?;
        let ops = (0..n).map(|q| [embed(&sigma_x(), q, n), embed(&sigma_z(), q, n)]).collect::<Vec<_>>();
        let zz_td = (0..pairs).map(|p| &ops[p][1] * &ops[pairs + p][1]).collect();
        let zz_tt = (pairs == 2).then(|| &ops[0][1] * &ops[1][1]);
        Ok(Self { schedule, spec, pairs, target_coupling, a_t, b_t, ops, zz_tt, zz_td })
    }

    pub fn detector_s(&self, t: f64) -> f64 {
        (t / self.spec.ramp_ns).clamp(0.0, 1.0)
    }
}

impl HamiltonianPath for QuenchPath<'_> {
    fn dim(&self) -> usize {
        1 << (2 * self.pairs)
    }

    fn at(&self, t: f64) -> Result<CMat> {
        let s = self.detector_s(t);
        let (a_d, b_d) = (self.schedule.a(s)?, self.schedule.b(s)?);
        let mut h = CMat::zeros(self.dim(), self.dim());
        let g = C64::new((self.b_t * b_d).sqrt() * self.spec.coupling_td / 2.0, 0.0);
        for p in 0..self.pairs {
            let d = self.pairs + p;
            h -= &self.ops[p][0] * C64::new(self.a_t / 2.0, 0.0);
            h -= &self.ops[d][0] * C64::new(a_d / 2.0, 0.0);
            h += &self.zz_td[p] * g;
            h += &self.ops[d][1] * C64::new(b_d * self.spec.tilt / 2.0, 0.0);
        }
        if let Some(zz) = &self.zz_tt {
            h += zz * C64::new(self.target_coupling / 2.0, 0.0);
        }
        Ok(h)
    }
}

pub const PROPAGATOR_TOL: f64 = 1e-10;

/// Readout axis of the single target–detector quench.
pub fn quench_readout_axis(schedule: &AnnealSchedule, spec: &QuenchSpec) -> Result<ReadoutAxis> {
    let path = QuenchPath::new(schedule, spec.clone(), 1, 0.0)?;
    let u = converged_propagator(&path, spec.duration(), PROPAGATOR_TOL)?;
    readout_axis(&total_channel(&u)?)
}

/// Oracle: process tomography by integrating ρ(t) directly with RK4 for the
/// Pauli inputs P_b ⊗ |+⟩⟨+|.
pub fn tomography_readout_axis(path: &dyn HamiltonianPath, duration: f64, steps: usize) -> Result<ReadoutAxis> {
    if path.dim() != 4 {
        return Err(Error::Dimension { expected: 4, got: path.dim() });
    }
    let plus = CMat::from_element(2, 2, C64::new(0.5, 0.0));
    let dt = duration / steps as f64;
    let rhs = |t: f64, rho: &CMat| -> Result<CMat> {
        let h = path.at(t)?;
        Ok((&h * rho - rho * &h) * C64::new(0.0, -2.0 * PI))
    };
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip([sigma_x(), sigma_y(), sigma_z()]) {
        let mut rho = p.kronecker(&plus);
        for k in 0..steps {
            let t = k as f64 * dt;
            let h = C64::new(dt, 0.0);
            let k1 = rhs(t, &rho)?;
            let k2 = rhs(t + dt / 2.0, &(&rho + &k1 * (h * 0.5)))?;
            let k3 = rhs(t + dt / 2.0, &(&rho + &k2 * (h * 0.5)))?;
            let k4 = rhs(t + dt, &(&rho + &k3 * h))?;
            rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (h / 6.0);
        }
        // Detector populations after tracing out the target.
        let p0 = rho[(0, 0)] + rho[(2, 2)];
        let p1 = rho[(1, 1)] + rho[(3, 3)];
        *slot = 0.5 * (p0 - p1).re;
    }
    ReadoutAxis::from_vector(v)
}

/// Local and non-local readout fidelities of the two-pair model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTargetFidelity {
    pub target_coupling: f64,
    pub local: f64,
    pub nonlocal: f64,
    /// Readout axis of detector 1 restricted to its own target.
    pub axis: ReadoutAxis,
}

fn pauli(a: usize) -> CMat {
    match a {
        0 => identity2(),
        1 => sigma_x(),
        2 => sigma_y(),
        _ => sigma_z(),
    }
}

/// Pauli transfer rows (ZI and IZ on the detectors) against all 16 target inputs,
/// indexed [detector][a·4 + b].
pub fn two_target_transfer(u: &CMat) -> Result<[[f64; 16]; 2]> {
    if u.nrows() != 16 {
        return Err(Error::Dimension { expected: 16, got: u.nrows() });
    }
    let plus = CMat::from_element(2, 2, C64::new(0.5, 0.0));
    let dets = plus.kronecker(&plus);
    let ud = u.adjoint();
    let mut rows = [[0.0; 16]; 2];
    for a in 0..4 {
        for b in 0..4 {
            let rho = pauli(a).kronecker(&pauli(b)).kronecker(&dets);
            let out = u * rho * &ud;
            // Detector populations; dephasing keeps only the diagonal.
            let mut pop = [zero(); 4];
            for (x, slot) in pop.iter_mut().enumerate() {
                *slot = (0..4).map(|t| out[(t * 4 + x, t * 4 + x)]).sum();
            }
            let z1 = pop[0] + pop[1] - pop[2] - pop[3];
            let z2 = pop[0] - pop[1] + pop[2] - pop[3];
            rows[0][a * 4 + b] = z1.re / 4.0;
            rows[1][a * 4 + b] = z2.re / 4.0;
        }
    }
    Ok(rows)
}

pub fn two_target_fidelity(
    schedule: &AnnealSchedule,
    spec: &QuenchSpec,
    target_coupling: f64,
) -> Result<TwoTargetFidelity> {
    let path = QuenchPath::new(schedule, spec.clone(), 2, target_coupling)?;
    let u = converged_propagator(&path, spec.duration(), PROPAGATOR_TOL)?;
    let rows = two_target_transfer(&u)?;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Detector 1 sees target inputs P_a ⊗ I, detector 2 sees I ⊗ P_b.
    let local1 = [rows[0][4], rows[0][8], rows[0][12]];
    let local2 = [rows[1][1], rows[1][2], rows[1][3]];
    let local = 0.5 * (norm(&local1) + norm(&local2));
    let nonlocal = 0.5 * (norm(&rows[0][1..]) + norm(&rows[1][1..]));
    Ok(TwoTargetFidelity { target_coupling, local, nonlocal, axis: ReadoutAxis::from_vector(local1)? })
}

/// Real 2×2 rotation exp(−iασz/2) on the target, for equivariance checks.
pub fn target_z_rotation(alpha: f64) -> CMat {
    let rz = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::from_polar(1.0, -alpha / 2.0),
        C64::from_polar(1.0, alpha / 2.0),
    ]));
    rz.kronecker(&identity2())
}

/// Exchange-swap unitary of a target–detector pair.
pub fn swap_unitary() -> CMat {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = 1.0;
    m[(1, 2)] = 1.0;
    m[(2, 1)] = 1.0;
    m[(3, 3)] = 1.0;
    m.map(|x| C64::new(x, 0.0))
}

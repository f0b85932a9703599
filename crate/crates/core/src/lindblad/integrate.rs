use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{BlochState, NoiseParams};
use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_defect, hermitize, max_abs, kron_all, sigma_minus, sigma_x, sigma_y, sigma_z, site_operator, CMat, CVec, I};

pub const MAX_DIM: usize = 1 << 12;
/// Systems up to this dimension are stepped through a cached superoperator.
const SUPEROPERATOR_DIM: usize = 8;
/// Bound on h·‖ℒ‖₁ per step in superoperator mode.
const SUPEROPERATOR_STEP: f64 = 1e-3;

/// Jump operator `op` with rate γ (1/ns); contributes γ(LρL† − ½{L†L, ρ}).
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub op: CMat,
    pub rate: f64,
}

pub fn single_qubit_hamiltonian(delta: f64) -> CMat {
    sigma_z() * c(-0.5 * delta)
}

/// σ⁻ at rate 1/T1 and σz at rate 1/(2Tφ); infinite times contribute nothing.
pub fn single_qubit_jumps(noise: NoiseParams) -> Vec<JumpOperator> {
    site_jumps(noise, 0, 1)
}

fn site_jumps(noise: NoiseParams, site: usize, n: usize) -> Vec<JumpOperator> {
    let mut out = Vec::new();
    if noise.t1.is_finite() {
        out.push(JumpOperator { op: site_operator(&sigma_minus(), site, n), rate: 1.0 / noise.t1 });
    }
    if noise.t_phi.is_finite() {
        out.push(JumpOperator { op: site_operator(&sigma_z(), site, n), rate: 0.5 / noise.t_phi });
    }
    out
}

pub fn two_qubit_jumps(noise: NoiseParams) -> Vec<JumpOperator> {
    let mut out = site_jumps(noise, 0, 2);
    out.extend(site_jumps(noise, 1, 2));
    out
}

/// −(Δ/2)(σz₁ + σz₂) + (𝒥/4)(σx₁σx₂ + σy₁σy₂); qubit 1 is site 0.
pub fn exchange_hamiltonian(delta: f64, coupling: f64) -> CMat {
    let z = site_operator(&sigma_z(), 0, 2) + site_operator(&sigma_z(), 1, 2);
    let xy = kron_all(&[sigma_x(), sigma_x()]) + kron_all(&[sigma_y(), sigma_y()]);
    z * c(-0.5 * delta) + xy * c(0.25 * coupling)
}

/// Product density matrix; entry `i` of `states` is site `i`.
pub fn product_state(states: &[BlochState]) -> CMat {
    let ops: Vec<CMat> = states.iter().rev().map(|s| s.density_matrix()).collect();
    kron_all(&ops)
}

/// Liouvillian acting on row-major vec(ρ): vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
pub fn liouvillian(h: &CMat, jumps: &[JumpOperator]) -> CMat {
    let d = h.nrows();
    let id = CMat::identity(d, d);
    let mut l = (h.kronecker(&id) - id.kronecker(&h.transpose())) * (-2.0 * PI * I);
    for j in jumps {
        let ldl = j.op.adjoint() * &j.op;
        l += (j.op.kronecker(&j.op.map(|z| z.conj()))
            - (ldl.kronecker(&id) + id.kronecker(&ldl.transpose())) * c(0.5))
            * c(j.rate);
    }
    l
}

fn vec_row_major(m: &CMat) -> CVec {
    let d = m.nrows();
    CVec::from_iterator(d * d, (0..d).flat_map(|i| (0..d).map(move |j| m[(i, j)])))
}

fn unvec_row_major(v: &CVec, d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| v[i * d + j])
}

fn check_physical(rho: &CMat) -> Result<()> {
    let d = rho.nrows();
    let herm = hermiticity_defect(rho);
    if herm > 1e-10 {
        return Err(Error::Validation(format!("ρ0 not Hermitian (defect {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - c(1.0)).norm() > 1e-10 {
        return Err(Error::Validation(format!("ρ0 trace {tr} ≠ 1")));
    }
    let mut h = rho.clone();
    hermitize(&mut h);
    let min = SymmetricEigen::new(h).eigenvalues.min();
    if min < -1e-10 {
        return Err(Error::Validation(format!("ρ0 has negative eigenvalue {min:e} (d = {d})")));
    }
    Ok(())
}

fn mat_pow(m: &CMat, mut n: u64) -> CMat {
    let mut result = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Fixed-step fourth-order propagation of the master equation, sampled on `t_grid`.
///
/// `rho0` is the state at t = 0; `t_grid` must be non-negative and non-decreasing.
pub fn lindblad_integrate(
    hamiltonian: &CMat,
    jumps: &[JumpOperator],
    rho0: &CMat,
    t_grid: &[f64],
) -> Result<Vec<CMat>> {
    let d = hamiltonian.nrows();
    if d == 0 || d > MAX_DIM || !hamiltonian.is_square() {
        return Err(Error::Size(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    if rho0.nrows() != d || !rho0.is_square() {
        return Err(Error::Dimension { expected: d, got: rho0.nrows() });
    }
    if let Some(j) = jumps.iter().find(|j| j.op.nrows() != d || !j.op.is_square()) {
        return Err(Error::Dimension { expected: d, got: j.op.nrows() });
    }
    if jumps.iter().any(|j| !(j.rate >= 0.0) || !j.rate.is_finite()) {
        return Err(Error::Validation("jump rates must be finite and non-negative".into()));
    }
    if hermiticity_defect(hamiltonian) > 1e-12 * max_abs(hamiltonian).max(1.0) {
        return Err(Error::Validation("Hamiltonian is not Hermitian".into()));
    }
    check_physical(rho0)?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be finite, non-negative and non-decreasing".into()));
    }

    // Gershgorin bound on the spectral radius of H.
    let energy = (0..d)
        .map(|i| hamiltonian.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut h_max = f64::INFINITY;
    if energy > 0.0 {
        h_max = h_max.min(1.0 / (20.0 * energy));
    }
    for j in jumps.iter().filter(|j| j.rate > 0.0) {
        h_max = h_max.min(1.0 / j.rate);
    }

    let mut out = Vec::with_capacity(t_grid.len());
    let mut t_now = 0.0;
    if d <= SUPEROPERATOR_DIM {
        let l = liouvillian(hamiltonian, jumps);
        let norm1 = (0..l.ncols())
            .map(|j| l.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0f64, f64::max);
        if norm1 > 0.0 {
            h_max = h_max.min(SUPEROPERATOR_STEP / norm1);
        }
        let mut v = vec_row_major(rho0);
        let mut cached: Option<(f64, CMat)> = None;
        for &t in t_grid {
            let dt = t - t_now;
            if dt > 0.0 {
                let reuse = matches!(&cached, Some((c_dt, _)) if (c_dt - dt).abs() <= 1e-13 * dt);
                if !reuse {
                    let n = (dt / h_max).ceil().max(1.0);
                    let step = rk4_polynomial(&l, dt / n);
                    cached = Some((dt, mat_pow(&step, n as u64)));
                }
                v = &cached.as_ref().expect("propagator cached").1 * v;
                t_now = t;
            }
            let mut rho = unvec_row_major(&v, d);
            hermitize(&mut rho);
            out.push(rho);
        }
    } else {
        let mut rho = rho0.clone();
        for &t in t_grid {
            let dt = t - t_now;
            if dt > 0.0 {
                let n = (dt / h_max).ceil().max(1.0) as usize;
                let h = dt / n as f64;
                for _ in 0..n {
                    rho = rk4_step(hamiltonian, jumps, &rho, h);
                    hermitize(&mut rho);
                }
                t_now = t;
            }
            out.push(rho.clone());
        }
    }
    Ok(out)
}

/// Σ_{k≤4} (hℒ)^k / k!, one classical RK4 step of a linear system.
fn rk4_polynomial(l: &CMat, h: f64) -> CMat {
    let n = l.nrows();
    let a = l * c(h);
    let mut term = CMat::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=4 {
        term = &term * &a * c(1.0 / k as f64);
        sum += &term;
    }
    sum
}

fn lindblad_rhs(h: &CMat, jumps: &[JumpOperator], rho: &CMat) -> CMat {
    let hr = h * rho;
    let mut out = (&hr - hr.adjoint()) * (-2.0 * PI * I);
    for j in jumps {
        let l_rho = &j.op * rho;
        let ldl = j.op.adjoint() * &j.op;
        let anti = &ldl * rho;
        out += (l_rho * j.op.adjoint() - (&anti + anti.adjoint()) * c(0.5)) * c(j.rate);
    }
    out
}

fn rk4_step(h: &CMat, jumps: &[JumpOperator], rho: &CMat, dt: f64) -> CMat {
    let half = c(0.5 * dt);
    let k1 = lindblad_rhs(h, jumps, rho);
    let k2 = lindblad_rhs(h, jumps, &(rho + &k1 * half));
    let k3 = lindblad_rhs(h, jumps, &(rho + &k2 * half));
    let k4 = lindblad_rhs(h, jumps, &(rho + &k3 * c(dt)));
    rho + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(dt / 6.0)
}

/// ⟨σz₁⟩, ⟨σz₂⟩ and ⟨σz₁σz₂⟩ at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeSample {
    pub t: f64,
    pub sz1: f64,
    pub sz2: f64,
    pub szsz: f64,
}

/// Full two-qubit master-equation solution under `exchange_hamiltonian`.
pub fn exchange_lindblad(
    delta: f64,
    coupling: f64,
    noise: NoiseParams,
    rho0: &CMat,
    t_grid: &[f64],
) -> Result<Vec<ExchangeSample>> {
    let h = exchange_hamiltonian(delta, coupling);
    let traj = lindblad_integrate(&h, &two_qubit_jumps(noise), rho0, t_grid)?;
    Ok(traj
        .iter()
        .zip(t_grid)
        .map(|(rho, &t)| {
            let p: Vec<f64> = (0..4).map(|b| rho[(b, b)].re).collect();
            // Index bit 0 is qubit 1; a set bit means σz = −1.
            ExchangeSample {
                t,
                sz1: p[0] - p[1] + p[2] - p[3],
                sz2: p[0] + p[1] - p[2] - p[3],
                szsz: p[0] - p[1] - p[2] + p[3],
            }
        })
        .collect())
}

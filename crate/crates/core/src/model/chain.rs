use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_J_RANGE: f64 = 2.0;
pub const DEFAULT_WEAK_COUPLING_THRESHOLD: f64 = 0.5;

fn default_j_range() -> f64 {
    DEFAULT_J_RANGE
}

/// Programmed chain: dimensionless couplings, anneal offsets and operating point.
///
/// Bond `i` joins sites `i` and `i + 1` (mod `length` when periodic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub length: usize,
    pub periodic: bool,
    pub couplings: Vec<f64>,
    #[serde(default)]
    pub offsets: Vec<f64>,
    pub s_star: f64,
    #[serde(default)]
    pub fields: Vec<f64>,
    #[serde(default = "default_j_range")]
    pub j_range: f64,
}

impl ChainSpec {
    pub fn uniform(length: usize, periodic: bool, coupling: f64, s_star: f64) -> Self {
        Self {
            length,
            periodic,
            couplings: vec![coupling; bond_count(length, periodic)],
            offsets: vec![0.0; length],
            s_star,
            fields: vec![0.0; length],
            j_range: DEFAULT_J_RANGE,
        }
    }

    pub fn bond_count(&self) -> usize {
        bond_count(self.length, self.periodic)
    }

    pub fn bond(&self, b: usize) -> (usize, usize) {
        (b, (b + 1) % self.length)
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.offsets.get(i).copied().unwrap_or(0.0)
    }

    pub fn site_s(&self, i: usize) -> f64 {
        self.s_star + self.offset(i)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Validation("chain length must be positive".into()));
        }
        if self.periodic && self.length < 3 {
            return Err(Error::Validation("periodic chains need at least 3 sites".into()));
        }
        if self.couplings.len() != self.bond_count() {
            return Err(Error::Validation(format!(
                "expected {} couplings, found {}",
                self.bond_count(),
                self.couplings.len()
            )));
        }
        if !self.offsets.is_empty() && self.offsets.len() != self.length {
            return Err(Error::Validation(format!(
                "expected {} offsets, found {}",
                self.length,
                self.offsets.len()
            )));
        }
        if !self.fields.is_empty() && self.fields.len() != self.length {
            return Err(Error::Validation(format!(
                "expected {} longitudinal fields, found {}",
                self.length,
                self.fields.len()
            )));
        }
        if !(self.j_range > 0.0) {
            return Err(Error::Validation("j_range must be positive".into()));
        }
        if let Some(j) = self.couplings.iter().find(|j| !(j.abs() <= self.j_range)) {
            return Err(Error::Range(format!(
                "coupling {j} outside programmable range ±{}",
                self.j_range
            )));
        }
        for i in 0..self.length {
            let s = self.site_s(i);
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Domain(format!("site {i}: s* + offset = {s} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

pub(crate) fn bond_count(length: usize, periodic: bool) -> usize {
    if periodic {
        length
    } else {
        length.saturating_sub(1)
    }
}

/// Rotating-frame XY model: gap Δ, detunings δΔ_i and nearest-neighbour 𝒥_i, all in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveXYModel {
    pub delta: f64,
    pub detunings: Vec<f64>,
    pub couplings: Vec<f64>,
    pub length: usize,
    pub periodic: bool,
    pub weak_coupling: bool,
}

impl EffectiveXYModel {
    pub fn new(delta: f64, detunings: Vec<f64>, couplings: Vec<f64>, periodic: bool) -> Result<Self> {
        Self::with_threshold(delta, detunings, couplings, periodic, DEFAULT_WEAK_COUPLING_THRESHOLD)
    }

    pub fn with_threshold(
        delta: f64,
        detunings: Vec<f64>,
        couplings: Vec<f64>,
        periodic: bool,
        threshold: f64,
    ) -> Result<Self> {
        let length = detunings.len();
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Validation(format!("gap Δ = {delta} must be positive")));
        }
        if length == 0 {
            return Err(Error::Validation("model needs at least one site".into()));
        }
        if periodic && length < 3 {
            return Err(Error::Validation("periodic chains need at least 3 sites".into()));
        }
        if couplings.len() != bond_count(length, periodic) {
            return Err(Error::Validation(format!(
                "expected {} couplings for L = {length}, found {}",
                bond_count(length, periodic),
                couplings.len()
            )));
        }
        if detunings.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite model parameter".into()));
        }
        let max_j = couplings.iter().fold(0.0f64, |m, j| m.max(j.abs()));
        let max_d = detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let weak_coupling = max_j / delta < threshold && max_d / delta < threshold;
        Ok(Self { delta, detunings, couplings, length, periodic, weak_coupling })
    }

    /// Uniform chain with no detunings.
    pub fn clean(length: usize, delta: f64, coupling: f64, periodic: bool) -> Result<Self> {
        Self::new(delta, vec![0.0; length], vec![coupling; bond_count(length, periodic)], periodic)
    }

    pub fn bond(&self, b: usize) -> (usize, usize, f64) {
        (b, (b + 1) % self.length, self.couplings[b])
    }

    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.couplings.len()).map(|b| self.bond(b))
    }

    /// Site energy A_i = Δ + δΔ_i.
    pub fn site_energy(&self, i: usize) -> f64 {
        self.delta + self.detunings[i]
    }
}

//! Simulation engines for analog-digital quantum dynamics on annealing hardware.
//!
//! Units: energies in GHz, times in ns; every propagator is e^{−i2πHt}.
//! Canonical spin basis is the rotated one (σx = −τz, σz = τx); basis index bit `i`
//! is site `i`, and a set bit is an excitation (σz = −1).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod exact;
pub mod fermion;
pub mod fit;
pub mod lindblad;
pub mod linalg;
pub mod magnon;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
pub use lindblad::{BlochAxis, BlochState, ExchangeObservables, NoiseParams, Pairing};
pub use model::{AnnealSchedule, ChainSpec, EffectiveXYModel};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Free-fermion engine for transverse-field Ising chains.

mod anderson;
mod bdg;
mod majorana;

pub use anderson::{
    disorder_ensemble, disorder_realization, fit_quadratic_scaling, imbalance, imbalance_value,
    late_imbalance, run_ensemble, small_w_grid, staggered_imbalance, staggered_sites, ImbalanceSeries,
    LateImbalance, ScalingFit, DEFAULT_W_SET, LATE_WINDOW_NS,
};
pub use bdg::{
    build_bdg, init_pi_pulses, measure_tau_x, BdGPropagator, BdGState, BdGSystem, ParitySector,
    PreparedState, SiteSetReadout,
};
pub use majorana::{majorana_generator, x_basis_field, XBasisEngine};

use crate::error::Result;
use nalgebra::DMatrix;

/// (u; v)(t) = e^{−i2πH t}(u; v)(0) for a prebuilt BdG matrix.
pub fn evolve_bdg(state: &BdGState, h_bdg: &DMatrix<f64>, t: f64) -> Result<BdGState> {
    BdGPropagator::from_matrix(h_bdg).evolve(state, t)
}

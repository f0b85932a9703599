use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a paired run enters the symmetrized series.
///
/// Run B uses θ_s → π − θ_s, φ_s → φ_s + π, which flips the source Bloch vector.
/// Terms linear in the source vector are odd under the pairing and survive `Odd`
/// as (a − b)/2; source-independent terms such as the relaxation background
/// survive `Even` as (a + b)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    Odd,
    Even,
}

pub fn spam_symmetrize(run_a: &[f64], run_b: &[f64], pairing: Pairing) -> Result<Vec<f64>> {
    if run_a.len() != run_b.len() {
        return Err(Error::Validation(format!(
            "paired series differ in length ({} vs {})",
            run_a.len(),
            run_b.len()
        )));
    }
    let sign = match pairing {
        Pairing::Odd => -1.0,
        Pairing::Even => 1.0,
    };
    Ok(run_a.iter().zip(run_b).map(|(a, b)| 0.5 * (a + sign * b)).collect())
}

//! Closed-form and binomial-sum predictions for the late-time ensemble.
//!
//! Symmetric late-time states are modelled by a global unitary that is Haar
//! within each charge sector; only its first and second moments enter.
//! Everything is evaluated in log space so that `N` up to a few hundred is
//! safe.

pub mod binomial;
pub mod moments;
pub mod scan;

pub use moments::{
    averaged_rho_a_first_order, f_coeff, f_coeff_exact, first_moment_diagonal, first_moment_diagonal_weights,
    ln_f_coeff, nonsym_late_asymmetry, u1_late_asymmetry_exact, u1_late_asymmetry_gaussian, u1_late_purities,
    ChargeWeights, GaussianLate, LateTimeQuery, NonSymmetricLate, PurityPair, U1SecondMoment,
};
pub use scan::{fit_power_law, half_pi_grid, theta_scan, uniform_grid, PowerLawFit, ThetaScan};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of the oracle table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    pub theta: f64,
    #[serde(rename = "purity_A")]
    pub purity_a: f64,
    #[serde(rename = "purity_AQ")]
    pub purity_aq: f64,
    #[serde(rename = "dS2_exact")]
    pub ds2_exact: f64,
    /// NaN where the Gaussian form is undefined (θ ∈ {0, π}).
    #[serde(rename = "dS2_gaussian")]
    pub ds2_gaussian: f64,
    pub gaussian_valid: bool,
}

/// Oracle rows for every `(a, θ)` combination at fixed `N`.
pub fn oracle_rows(n: usize, subsystem_sizes: &[usize], thetas: &[f64]) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::with_capacity(subsystem_sizes.len() * thetas.len());
    for &a in subsystem_sizes {
        let moments = U1SecondMoment::new(n, a)?;
        for &theta in thetas {
            let pair = moments.ferro(theta);
            let (ds2_gaussian, gaussian_valid) = match u1_late_asymmetry_gaussian(n, a, theta) {
                Ok(g) => (g.value, g.valid),
                Err(_) => (f64::NAN, false),
            };
            rows.push(OracleRow {
                n,
                a,
                theta,
                purity_a: pair.purity_a,
                purity_aq: pair.purity_aq,
                ds2_exact: pair.renyi2_asymmetry,
                ds2_gaussian,
                gaussian_valid,
            });
        }
    }
    Ok(rows)
}

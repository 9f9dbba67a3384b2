//! Likelihood-ratio tests, information criteria, sandwich standard errors
//! and the rolling-correlation baseline.

mod rolling;
mod sandwich;

use serde::{Deserialize, Serialize};

pub use rolling::{pair_label, rolling_correlation, RollingPath};
pub use sandwich::{robust_se, sandwich_from_parts, StandardErrors, DERIVATIVE_STEP};

use crate::error::{Error, Result};
use crate::stats::{chi2_critical, chi2_sf};

/// Upper 10% points of χ²(1) and χ²(2).
const CHI2_10PCT: [f64; 2] = [2.705_543_454_095_404, 4.605_170_185_988_091];

/// χ² critical value at the 10% level.
pub fn chi2_critical_10pct(dof: usize) -> f64 {
    match dof {
        1 | 2 => CHI2_10PCT[dof - 1],
        _ => chi2_critical(0.10, dof),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrResult {
    pub statistic: f64,
    pub dof: usize,
    pub critical_value_10pct: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// `max(0, 2(L_u − L_r))` against χ²(dof) at 10%. When the restriction puts a
/// parameter on the boundary of its space the χ² reference is only nominal.
pub fn lr_test(l_restricted: f64, l_unrestricted: f64, dof: usize) -> Result<LrResult> {
    if dof == 0 {
        return Err(Error::InvalidInput("LR test needs dof >= 1".into()));
    }
    let statistic = (2.0 * (l_unrestricted - l_restricted)).max(0.0);
    let critical_value_10pct = chi2_critical_10pct(dof);
    Ok(LrResult {
        statistic,
        dof,
        critical_value_10pct,
        p_value: chi2_sf(statistic, dof),
        reject: statistic > critical_value_10pct,
    })
}

/// Per-observation AIC, `(2k − 2L) / T`.
pub fn aic(loglik: f64, n_params: usize, t_obs: usize) -> f64 {
    assert!(t_obs > 0, "AIC needs at least one observation");
    (2.0 * n_params as f64 - 2.0 * loglik) / t_obs as f64
}

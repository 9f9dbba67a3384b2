//! Preliminary analysis: unit roots, ARMA identification, ARCH effects.

mod adf;
mod arch_lm;
mod arma;

pub use adf::{adf_test, critical_values, default_max_lag, mackinnon_p_value, AdfResult};
pub use arch_lm::{arch_lm_test, ArchLmResult, DEFAULT_ARCH_LAGS};
pub use arma::{fit_arma, max_inverse_root, select_arma, select_arma_order, ArmaFit, ArmaSelection, ArmaSpec};

//! Two-step conditional correlation estimation.
//!
//! Univariate GARCH(1,1) filters each series to de-GARCHed residuals; the
//! residual panel then feeds a constant (CCC), dynamic (DCC) or nonlinear
//! autoregressive (NLARC) conditional correlation model with targeted R̄.

pub mod correlation;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod optim;
pub mod pipeline;
pub mod simulation;
pub mod stats;
pub mod volatility;

pub use error::{Error, Result};

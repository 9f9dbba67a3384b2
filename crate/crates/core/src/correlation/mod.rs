//! Second step: constant (CCC), dynamic (DCC, Aielli-corrected) and
//! nonlinear autoregressive (NLARC) conditional correlation models.

mod estimate;
mod filter;
mod likelihood;
mod targeting;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use estimate::{ccc_estimate, fit_corr, fit_corr_with, fit_nlarc_from_dcc, CorrFit, EstimationOptions, BOUNDARY_TOL};
pub(crate) use filter::Recursion;
pub use filter::{dcc_filter, filter_path, gate_entry, hadamard_gate, nlarc_filter, CorrelationPath};
pub use likelihood::{corr_loglik, corr_obs_loglik};
pub use targeting::{target_r_bar, Targeting, TargetingOptions};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ccc,
    Dcc,
    Nlarc,
}

impl ModelKind {
    pub fn n_params(self) -> usize {
        match self {
            ModelKind::Ccc => 0,
            ModelKind::Dcc => 2,
            ModelKind::Nlarc => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ccc => "CCC",
            ModelKind::Dcc => "DCC",
            ModelKind::Nlarc => "NLARC",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ccc" => Ok(ModelKind::Ccc),
            "dcc" => Ok(ModelKind::Dcc),
            "nlarc" => Ok(ModelKind::Nlarc),
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DccParams {
    pub a: f64,
    pub b: f64,
}

impl DccParams {
    /// `a, b ≥ 0`, `a + b < 1`. The boundary `a = 0` is admitted.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a >= 0.0 && b >= 0.0 && a + b < 1.0 {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidParams(format!("DCC needs a, b >= 0 and a + b < 1; got a = {a}, b = {b}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlarcParams {
    pub a: f64,
    pub b: f64,
    pub phi_a: f64,
}

impl NlarcParams {
    pub fn new(a: f64, b: f64, phi_a: f64) -> Result<Self> {
        DccParams::new(a, b)?;
        if phi_a >= 0.0 && phi_a.is_finite() {
            Ok(Self { a, b, phi_a })
        } else {
            Err(Error::InvalidParams(format!("NLARC needs phi_A >= 0; got {phi_a}")))
        }
    }

    pub fn dcc(&self) -> DccParams {
        DccParams { a: self.a, b: self.b }
    }
}

/// A fully parameterized correlation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorrModel {
    Ccc,
    Dcc(DccParams),
    Nlarc(NlarcParams),
}

impl CorrModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            CorrModel::Ccc => ModelKind::Ccc,
            CorrModel::Dcc(_) => ModelKind::Dcc,
            CorrModel::Nlarc(_) => ModelKind::Nlarc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CorrModel::Ccc => Ok(()),
            CorrModel::Dcc(p) => DccParams::new(p.a, p.b).map(|_| ()),
            CorrModel::Nlarc(p) => NlarcParams::new(p.a, p.b, p.phi_a).map(|_| ()),
        }
    }

    /// Parameter vector in reporting order: (a, b) or (a, b, φ_A).
    pub fn values(&self) -> Vec<f64> {
        match *self {
            CorrModel::Ccc => vec![],
            CorrModel::Dcc(p) => vec![p.a, p.b],
            CorrModel::Nlarc(p) => vec![p.a, p.b, p.phi_a],
        }
    }

    pub fn from_values(kind: ModelKind, v: &[f64]) -> Result<Self> {
        match (kind, v.len()) {
            (ModelKind::Ccc, 0) => Ok(CorrModel::Ccc),
            (ModelKind::Dcc, 2) => DccParams::new(v[0], v[1]).map(CorrModel::Dcc),
            (ModelKind::Nlarc, 3) => NlarcParams::new(v[0], v[1], v[2]).map(CorrModel::Nlarc),
            _ => Err(Error::InvalidParams(format!("{} values for {kind}", v.len()))),
        }
    }

    pub fn a(&self) -> f64 {
        match self {
            CorrModel::Ccc => 0.0,
            CorrModel::Dcc(p) => p.a,
            CorrModel::Nlarc(p) => p.a,
        }
    }
}

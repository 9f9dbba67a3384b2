//! First step: GARCH(1,1) conditional variances per series and the
//! de-GARCHed residuals that feed the correlation models.
//!
//! Series without ARCH effects are standardized by their unconditional
//! standard deviation instead.

use chrono::NaiveDate;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AlignedPanel, MIN_ESTIMATION_LENGTH};
use crate::diagnostics::{fit_arma, ArmaFit, ArmaSpec};
use crate::error::{Error, Result};
use crate::inference::robust_se;
use crate::linalg::RowMatrix;
use crate::optim::{bfgs, simplex_pair, simplex_pair_inverse, BfgsOptions, Minimum};
use crate::stats::{is_degenerate, variance, LN_2PI};

/// Shortest series the GARCH optimizer will accept.
pub const MIN_GARCH_LENGTH: usize = 50;

/// Fixed (α, β) starting points; ω starts at the implied variance target.
pub const GARCH_STARTS: [(f64, f64); 3] = [(0.05, 0.90), (0.10, 0.80), (0.02, 0.95)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { omega, alpha, beta };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(Error::InvalidParams(format!(
                "GARCH needs omega > 0, alpha, beta >= 0, alpha + beta < 1; got {omega}, {alpha}, {beta}"
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.omega > 0.0
            && self.alpha >= 0.0
            && self.beta >= 0.0
            && self.alpha + self.beta < 1.0
            && self.omega.is_finite()
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

/// Conditional variance path `h²_t = ω + α y²_{t-1} + β h²_{t-1}`, with
/// `h²_1 = h0` (sample variance of `y` when `None`).
pub fn garch_filter(y: &[f64], params: &GarchParams, h0: Option<f64>) -> Result<Vec<f64>> {
    if !params.is_valid() {
        return Err(Error::InvalidParams(format!("{params:?}")));
    }
    if y.is_empty() {
        return Ok(Vec::new());
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in GARCH input".into()));
    }
    let mut h = vec![0.0; y.len()];
    h[0] = h0.unwrap_or_else(|| variance(y));
    for t in 1..y.len() {
        h[t] = params.omega + params.alpha * y[t - 1] * y[t - 1] + params.beta * h[t - 1];
    }
    Ok(h)
}

/// Gaussian log-likelihood of `y` given a conditional variance path.
pub fn gaussian_loglik(y: &[f64], h: &[f64]) -> f64 {
    y.iter()
        .zip(h)
        .map(|(v, h)| -0.5 * (LN_2PI + h.ln() + v * v / h))
        .sum()
}

fn obs_loglik(y: &[f64], p: &GarchParams, h0: f64) -> Option<Vec<f64>> {
    if !p.is_valid() {
        return None;
    }
    let mut out = Vec::with_capacity(y.len());
    let mut h = h0;
    for t in 0..y.len() {
        if t > 0 {
            h = p.omega + p.alpha * y[t - 1] * y[t - 1] + p.beta * h;
        }
        out.push(-0.5 * (LN_2PI + h.ln() + y[t] * y[t] / h));
    }
    Some(out)
}

fn unpack(u: &[f64]) -> GarchParams {
    let (alpha, beta) = simplex_pair(u[1], u[2]);
    GarchParams {
        omega: u[0].exp(),
        alpha,
        beta,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GarchParams,
    /// Conditional variances h²_t.
    pub h_path: Vec<f64>,
    pub loglik: f64,
    /// Robust SEs of (ω, α, β); `None` where the information matrix is singular.
    pub std_errors: [Option<f64>; 3],
    pub converged: bool,
    /// False for the unconditional-scale fallback.
    pub used_garch: bool,
}

impl GarchFit {
    /// Constant-variance fit at the sample variance.
    pub fn unconditional(y: &[f64]) -> Result<Self> {
        if is_degenerate(y) {
            return Err(Error::ZeroVariance("series".into()));
        }
        let v = variance(y);
        let h_path = vec![v; y.len()];
        Ok(Self {
            params: GarchParams {
                omega: v,
                alpha: 0.0,
                beta: 0.0,
            },
            loglik: gaussian_loglik(y, &h_path),
            h_path,
            std_errors: [None; 3],
            converged: true,
            used_garch: false,
        })
    }
}

/// Gaussian QML GARCH(1,1) with three fixed starts; the best optimum is kept.
///
/// Estimation runs on `y / sd(y)` and maps ω back by `sd²`, so the fit is
/// scale equivariant. `converged` is false when no start met the gradient
/// tolerance; the best point found is still returned.
pub fn fit_garch(y: &[f64]) -> Result<GarchFit> {
    if y.len() < MIN_GARCH_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_GARCH_LENGTH,
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in GARCH input".into()));
    }
    if is_degenerate(y) {
        return Err(Error::ZeroVariance("GARCH input".into()));
    }
    let scale2 = variance(y);
    let sd = scale2.sqrt();
    let z: Vec<f64> = y.iter().map(|v| v / sd).collect();
    let h0 = variance(&z);
    let n = z.len() as f64;

    let objective = |u: &[f64]| {
        let p = unpack(u);
        if !p.is_valid() {
            return None;
        }
        debug_assert!(p.omega > 0.0 && p.alpha >= 0.0 && p.beta >= 0.0 && p.alpha + p.beta < 1.0);
        let mut h = h0;
        let mut ll = 0.0;
        for t in 0..z.len() {
            if t > 0 {
                h = p.omega + p.alpha * z[t - 1] * z[t - 1] + p.beta * h;
            }
            ll += h.ln() + z[t] * z[t] / h;
        }
        let v = 0.5 * (LN_2PI + ll / n);
        v.is_finite().then_some(v)
    };

    let opts = BfgsOptions::default();
    let mut best: Option<Minimum> = None;
    let mut any_converged = false;
    for (alpha, beta) in GARCH_STARTS {
        let (u1, u2) = simplex_pair_inverse(alpha, beta);
        let x0 = [(h0 * (1.0 - alpha - beta)).ln(), u1, u2];
        if let Some(m) = bfgs(objective, &x0, &opts) {
            any_converged |= m.converged;
            if best.as_ref().map_or(true, |b| m.value < b.value) {
                best = Some(m);
            }
        }
    }
    let best = best.ok_or_else(|| Error::NonConvergence("GARCH: no feasible start".into()))?;
    let pz = unpack(&best.x);
    let params = GarchParams {
        omega: pz.omega * scale2,
        ..pz
    };

    let se = robust_se(
        |th: &[f64]| {
            obs_loglik(
                &z,
                &GarchParams {
                    omega: th[0],
                    alpha: th[1],
                    beta: th[2],
                },
                h0,
            )
        },
        &[pz.omega, pz.alpha, pz.beta],
        &[false; 3],
        &[0.0; 3],
    );
    let std_errors = [se.robust[0].map(|s| s * scale2), se.robust[1], se.robust[2]];

    let h_path = garch_filter(y, &params, Some(scale2))?;
    Ok(GarchFit {
        loglik: gaussian_loglik(y, &h_path),
        params,
        h_path,
        std_errors,
        converged: any_converged && best.converged,
        used_garch: true,
    })
}

/// `y_t / h_t` with `h_t = sqrt(h²_t)`.
pub fn degarch(y: &[f64], fit: &GarchFit) -> Result<Vec<f64>> {
    if y.len() != fit.h_path.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} observations, {} variances",
            y.len(),
            fit.h_path.len()
        )));
    }
    if let Some(t) = fit.h_path.iter().position(|h| !(*h > 0.0)) {
        return Err(Error::InvalidInput(format!("non-positive variance at t = {t}")));
    }
    Ok(y.iter().zip(&fit.h_path).map(|(v, h)| v / h.sqrt()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleSource {
    Garch,
    Unconditional,
}

/// T×N de-GARCHed residuals with the scale provenance of each column.
#[derive(Debug, Clone, PartialEq)]
pub struct DegarchPanel {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub matrix: RowMatrix,
    pub scale: Vec<ScaleSource>,
}

impl DegarchPanel {
    /// Wraps an already standardized panel (e.g. read back from CSV).
    pub fn from_panel(panel: AlignedPanel) -> Self {
        let n = panel.n_series();
        Self {
            dates: panel.dates,
            names: panel.names,
            matrix: panel.matrix,
            scale: vec![ScaleSource::Unconditional; n],
        }
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.rows() == 0
    }

    pub fn n_series(&self) -> usize {
        self.matrix.cols()
    }
}

#[derive(Debug, Clone)]
pub struct FirstStep {
    pub panel: DegarchPanel,
    pub arma: Vec<ArmaFit>,
    pub garch: Vec<GarchFit>,
}

/// ARMA filter every column; GARCH-scale the flagged ones and standardize the
/// rest by their sample standard deviation. Flagged series shorter than
/// [`MIN_GARCH_LENGTH`] fall back to the unconditional scale with a warning.
pub fn first_step(panel: &AlignedPanel, arma_specs: &[ArmaSpec], hetero_flags: &[bool]) -> Result<FirstStep> {
    let n = panel.n_series();
    if arma_specs.len() != n || hetero_flags.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n} series but {} ARMA specs and {} flags",
            arma_specs.len(),
            hetero_flags.len()
        )));
    }
    if panel.len() < MIN_ESTIMATION_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_ESTIMATION_LENGTH,
            got: panel.len(),
        });
    }
    let per_series: Vec<Result<(ArmaFit, GarchFit, Vec<f64>, ScaleSource)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let name = &panel.names[i];
            let wrap = |e| Error::stage("first-step", Some(name), e);
            let y = panel.column(i);
            let arma = fit_arma(&y, arma_specs[i]).map_err(wrap)?;
            let resid = &arma.residuals;
            let garch = if hetero_flags[i] && resid.len() >= MIN_GARCH_LENGTH {
                fit_garch(resid).map_err(wrap)?
            } else {
                if hetero_flags[i] {
                    warn!("{name}: {} observations, too short for GARCH; using unconditional scale", resid.len());
                }
                GarchFit::unconditional(resid).map_err(wrap)?
            };
            let source = if garch.used_garch {
                ScaleSource::Garch
            } else {
                ScaleSource::Unconditional
            };
            let eps = degarch(resid, &garch).map_err(wrap)?;
            Ok((arma, garch, eps, source))
        })
        .collect();

    let mut arma = Vec::with_capacity(n);
    let mut garch = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for r in per_series {
        let (a, g, e, s) = r?;
        arma.push(a);
        garch.push(g);
        columns.push(e);
        scale.push(s);
    }
    Ok(FirstStep {
        panel: DegarchPanel {
            dates: panel.dates.clone(),
            names: panel.names.clone(),
            matrix: RowMatrix::from_columns(&columns),
            scale,
        },
        arma,
        garch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_variance_reduction() {
        let y = [0.3, -1.0, 2.0, 0.1, -0.7];
        let h = garch_filter(&y, &GarchParams::new(2.0, 0.0, 0.0).unwrap(), None).unwrap();
        assert!(h[1..].iter().all(|v| *v == 2.0));
    }

    #[test]
    fn zero_shocks_converge_to_fixed_point() {
        let y = vec![0.0; 60];
        let h = garch_filter(&y, &GarchParams::new(0.1, 0.3, 0.5).unwrap(), Some(1.0)).unwrap();
        let mut expected = 1.0;
        for v in &h[1..] {
            expected = 0.1 + 0.5 * expected;
            assert!((v - expected).abs() < 1e-15);
        }
        assert!((h[59] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GarchParams::new(0.0, 0.1, 0.5).is_err());
        assert!(GarchParams::new(0.1, 0.5, 0.5).is_err());
        assert!(GarchParams::new(0.1, -0.1, 0.5).is_err());
    }

    #[test]
    fn degarch_ratio_identity() {
        let h_path = vec![4.0, 9.0, 0.25];
        let fit = GarchFit {
            params: GarchParams::new(1.0, 0.0, 0.0).unwrap(),
            h_path,
            loglik: 0.0,
            std_errors: [None; 3],
            converged: true,
            used_garch: true,
        };
        let y = [2.0, 3.0, 0.5];
        assert_eq!(degarch(&y, &fit).unwrap(), vec![1.0, 1.0, 1.0]);
        assert!(degarch(&y[..2], &fit).is_err());
    }

    #[test]
    fn fallback_standardizes_exactly() {
        let y: Vec<f64> = (0..80).map(|t| ((t * 37) % 11) as f64 - 4.0).collect();
        let fit = GarchFit::unconditional(&y).unwrap();
        assert!(!fit.used_garch);
        assert!(fit.h_path.iter().all(|h| *h == variance(&y)));
        let e = degarch(&y, &fit).unwrap();
        assert!((variance(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_input_errors() {
        assert!(matches!(fit_garch(&[1.5; 100]), Err(Error::ZeroVariance(_))));
        assert!(matches!(fit_garch(&[1.5; 10]), Err(Error::TooShort { .. })));
    }
}

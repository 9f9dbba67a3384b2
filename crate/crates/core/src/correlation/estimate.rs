//! Maximum-likelihood estimation of the correlation models with R̄ profiled
//! by targeting inside every likelihood evaluation.

use serde::{Deserialize, Serialize};

use super::filter::{filter_path, CorrelationPath};
use super::likelihood::{corr_loglik, filtered_loglik};
use super::targeting::{target_r_bar, TargetingOptions};
use super::{CorrModel, DccParams, ModelKind, NlarcParams};
use crate::error::{Error, Result};
use crate::inference::{aic, robust_se};
use crate::linalg::{min_eigenvalue, RowMatrix};
use crate::optim::{bfgs, simplex_pair, simplex_pair_inverse, BfgsOptions, Minimum};
use crate::stats::{correlation_matrix, is_degenerate};
use crate::volatility::DegarchPanel;

/// A boundary candidate replaces the interior optimum when its
/// log-likelihood is within this distance of (or above) the interior value.
pub const BOUNDARY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationOptions {
    pub bfgs: BfgsOptions,
    /// Targeting used inside the likelihood; tighter than the reporting
    /// default so finite differences see a smooth profile.
    pub targeting: TargetingOptions,
    pub dcc_starts: Vec<(f64, f64)>,
    pub phi_starts: Vec<f64>,
    pub compute_se: bool,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
            targeting: TargetingOptions { tol: 1e-12, max_iter: 50 },
            dcc_starts: vec![(0.02, 0.95), (0.05, 0.90), (0.10, 0.80)],
            phi_starts: vec![0.1, 1.0, 5.0],
            compute_se: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrFit {
    pub kind: ModelKind,
    pub model: CorrModel,
    pub n: usize,
    pub t_obs: usize,
    /// Targeted unconditional correlation, row-major N×N.
    pub r_bar: Vec<f64>,
    #[serde(skip)]
    pub path: Option<CorrelationPath>,
    pub min_eigenvalue: f64,
    pub loglik: f64,
    /// Robust SEs in parameter order (a, b[, φ_A]).
    pub robust_se: Vec<Option<f64>>,
    pub hessian_se: Vec<Option<f64>>,
    /// Parameters pinned on the boundary of the parameter space.
    pub boundary: Vec<bool>,
    pub converged: bool,
    pub targeting_iterations: usize,
}

impl CorrFit {
    pub fn n_params(&self) -> usize {
        self.kind.n_params()
    }

    pub fn params(&self) -> Vec<f64> {
        self.model.values()
    }

    pub fn aic(&self) -> f64 {
        aic(self.loglik, self.n_params(), self.t_obs)
    }

    pub fn path(&self) -> &CorrelationPath {
        self.path.as_ref().expect("fit carries its path")
    }
}

fn check_panel(eps: &RowMatrix, min_extra: usize) -> Result<()> {
    let (t_len, n) = (eps.rows(), eps.cols());
    if n == 0 {
        return Err(Error::InvalidInput("empty panel".into()));
    }
    if t_len <= n + min_extra {
        return Err(Error::TooShort {
            needed: n + min_extra + 1,
            got: t_len,
        });
    }
    if eps.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite residual".into()));
    }
    for i in 0..n {
        if is_degenerate(&eps.column(i)) {
            return Err(Error::ZeroVariance(format!("residual column {i}")));
        }
    }
    Ok(())
}

/// Constant correlation at the sample correlation of the residuals.
pub fn ccc_estimate(eps: &DegarchPanel) -> Result<CorrFit> {
    ccc_from_matrix(&eps.matrix)
}

fn ccc_from_matrix(eps: &RowMatrix) -> Result<CorrFit> {
    check_panel(eps, 0)?;
    let n = eps.cols();
    let r_bar = correlation_matrix(eps);
    if !(min_eigenvalue(&r_bar, n) > 1e-10) {
        return Err(Error::SingularCorrelation);
    }
    let path = CorrelationPath::constant(&r_bar, n, eps.rows());
    let loglik = corr_loglik(eps, &path)?;
    Ok(CorrFit {
        kind: ModelKind::Ccc,
        model: CorrModel::Ccc,
        n,
        t_obs: eps.rows(),
        r_bar,
        min_eigenvalue: path.min_eigenvalue,
        path: Some(path),
        loglik,
        robust_se: vec![],
        hessian_se: vec![],
        boundary: vec![],
        converged: true,
        targeting_iterations: 0,
    })
}

/// Profile log-likelihood: target R̄ for `model`, then filter.
fn profiled_loglik(eps: &RowMatrix, model: &CorrModel, topts: &TargetingOptions, out: Option<&mut Vec<f64>>) -> Option<f64> {
    let tg = target_r_bar(eps, model, topts).ok()?;
    filtered_loglik(eps, model, &tg.r_bar, out)
}

fn dcc_from_u(u: &[f64]) -> CorrModel {
    let (a, b) = simplex_pair(u[0], u[1]);
    CorrModel::Dcc(DccParams { a, b })
}

fn nlarc_from_u(u: &[f64]) -> CorrModel {
    let (a, b) = simplex_pair(u[0], u[1]);
    CorrModel::Nlarc(NlarcParams { a, b, phi_a: u[2].exp() })
}

fn best_of(runs: Vec<Option<Minimum>>) -> Option<(Minimum, bool)> {
    let any_converged = runs.iter().flatten().any(|m| m.converged);
    let mut best: Option<Minimum> = None;
    for m in runs.into_iter().flatten() {
        // strict improvement only: ties keep the lower start index
        if best.as_ref().map_or(true, |b| m.value < b.value) {
            best = Some(m);
        }
    }
    best.map(|m| (m, any_converged))
}

fn minimize(eps: &RowMatrix, to_model: fn(&[f64]) -> CorrModel, starts: &[Vec<f64>], opts: &EstimationOptions) -> Option<(Minimum, bool)> {
    let t = eps.rows() as f64;
    let objective = |u: &[f64]| {
        let model = to_model(u);
        if model.validate().is_err() {
            return None;
        }
        profiled_loglik(eps, &model, &opts.targeting, None).map(|l| -l / t)
    };
    let runs = starts.iter().map(|x0| bfgs(objective, x0, &opts.bfgs)).collect();
    best_of(runs)
}

/// Targets R̄, stores the path and attaches robust SEs.
fn finalize(eps: &RowMatrix, model: CorrModel, pinned: Vec<bool>, converged: bool, opts: &EstimationOptions) -> Result<CorrFit> {
    let tg = target_r_bar(eps, &model, &opts.targeting)?;
    let path = filter_path(eps, &model, &tg.r_bar, None)?;
    let loglik = corr_loglik(eps, &path)?;
    let kind = model.kind();
    let theta = model.values();
    let k = theta.len();
    let (robust, hessian) = if opts.compute_se && k > 0 {
        let se = robust_se(
            |th: &[f64]| {
                let m = CorrModel::from_values(kind, th).ok()?;
                let mut c = Vec::with_capacity(eps.rows());
                profiled_loglik(eps, &m, &opts.targeting, Some(&mut c))?;
                Some(c)
            },
            &theta,
            &pinned,
            &vec![0.0; k],
        );
        (se.robust, se.hessian)
    } else {
        (vec![None; k], vec![None; k])
    };
    Ok(CorrFit {
        kind,
        model,
        n: eps.cols(),
        t_obs: eps.rows(),
        r_bar: tg.r_bar,
        min_eigenvalue: path.min_eigenvalue,
        path: Some(path),
        loglik,
        robust_se: robust,
        hessian_se: hessian,
        boundary: pinned,
        converged,
        targeting_iterations: tg.iterations,
    })
}

fn fit_dcc(eps: &RowMatrix, opts: &EstimationOptions) -> Result<CorrFit> {
    check_panel(eps, 5)?;
    let t = eps.rows() as f64;
    let starts: Vec<Vec<f64>> = opts
        .dcc_starts
        .iter()
        .map(|&(a, b)| {
            let (u0, u1) = simplex_pair_inverse(a, b);
            vec![u0, u1]
        })
        .collect();
    let (best, converged) =
        minimize(eps, dcc_from_u, &starts, opts).ok_or_else(|| Error::NonConvergence("DCC: every start failed".into()))?;
    let interior = dcc_from_u(&best.x);
    let l_interior = -best.value * t;

    // a = 0 collapses the recursion to R̄ for any b
    let b = interior.values()[1];
    let pinned_model = CorrModel::Dcc(DccParams { a: 0.0, b });
    let l_boundary = profiled_loglik(eps, &pinned_model, &opts.targeting, None).unwrap_or(f64::NEG_INFINITY);
    if l_boundary + BOUNDARY_TOL >= l_interior {
        finalize(eps, pinned_model, vec![true, false], true, opts)
    } else {
        finalize(eps, interior, vec![false, false], converged, opts)
    }
}

/// NLARC estimation reusing a DCC fit on the same residuals: the DCC optimum
/// seeds one extra start and is the φ_A = 0 boundary candidate, so the
/// NLARC log-likelihood never falls below the DCC one.
pub fn fit_nlarc_from_dcc(eps: &DegarchPanel, dcc: &CorrFit, opts: &EstimationOptions) -> Result<CorrFit> {
    nlarc_from_dcc(&eps.matrix, dcc, opts)
}

fn nlarc_from_dcc(eps: &RowMatrix, dcc: &CorrFit, opts: &EstimationOptions) -> Result<CorrFit> {
    check_panel(eps, 5)?;
    if dcc.kind != ModelKind::Dcc {
        return Err(Error::InvalidInput("NLARC seeding needs a DCC fit".into()));
    }
    let t = eps.rows() as f64;
    let mut starts = Vec::new();
    for &(a, b) in &opts.dcc_starts {
        let (u0, u1) = simplex_pair_inverse(a, b);
        for &phi in &opts.phi_starts {
            starts.push(vec![u0, u1, phi.ln()]);
        }
    }
    let dv = dcc.params();
    let a0 = dv[0].max(1e-4);
    let b0 = dv[1].clamp(1e-4, 1.0 - a0 - 1e-4);
    let (u0, u1) = simplex_pair_inverse(a0, b0);
    starts.push(vec![u0, u1, (1e-4f64).ln()]);

    let (best, converged) =
        minimize(eps, nlarc_from_u, &starts, opts).ok_or_else(|| Error::NonConvergence("NLARC: every start failed".into()))?;
    let l_interior = -best.value * t;
    if dcc.loglik + BOUNDARY_TOL >= l_interior {
        let model = CorrModel::Nlarc(NlarcParams {
            a: dv[0],
            b: dv[1],
            phi_a: 0.0,
        });
        finalize(eps, model, vec![dcc.boundary[0], false, true], dcc.converged, opts)
    } else {
        finalize(eps, nlarc_from_u(&best.x), vec![false; 3], converged, opts)
    }
}

/// Fits `kind` with default options.
pub fn fit_corr(eps: &DegarchPanel, kind: ModelKind) -> Result<CorrFit> {
    fit_corr_with(eps, kind, &EstimationOptions::default())
}

pub fn fit_corr_with(eps: &DegarchPanel, kind: ModelKind, opts: &EstimationOptions) -> Result<CorrFit> {
    let m = &eps.matrix;
    match kind {
        ModelKind::Ccc => ccc_from_matrix(m),
        ModelKind::Dcc => fit_dcc(m, opts),
        ModelKind::Nlarc => {
            let dcc = fit_dcc(m, opts)?;
            nlarc_from_dcc(m, &dcc, opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volatility::ScaleSource;
    use chrono::NaiveDate;

    fn panel(cols: Vec<Vec<f64>>) -> DegarchPanel {
        let t = cols[0].len();
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        DegarchPanel {
            dates: (0..t).map(|k| d0 + chrono::Days::new(k as u64)).collect(),
            names: (0..cols.len()).map(|i| format!("s{i}")).collect(),
            scale: vec![ScaleSource::Unconditional; cols.len()],
            matrix: RowMatrix::from_columns(&cols),
        }
    }

    #[test]
    fn identical_columns_are_singular() {
        let x: Vec<f64> = (0..50).map(|t| ((t * 13) % 7) as f64 - 3.0).collect();
        assert!(matches!(ccc_estimate(&panel(vec![x.clone(), x])), Err(Error::SingularCorrelation)));
    }

    #[test]
    fn orthogonal_columns_factorize() {
        // exactly orthogonal, zero-mean columns
        let x: Vec<f64> = (0..40).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y: Vec<f64> = (0..40).map(|t| if (t / 2) % 2 == 0 { 1.5 } else { -1.5 }).collect();
        let fit = ccc_estimate(&panel(vec![x.clone(), y.clone()])).unwrap();
        assert!(fit.r_bar[1].abs() < 1e-12);
        let indep: f64 = x
            .iter()
            .chain(&y)
            .map(|e| -0.5 * (crate::stats::LN_2PI + e * e))
            .sum();
        assert!((fit.loglik - indep).abs() < 1e-6);
        assert_eq!(fit.n_params(), 0);
    }

    #[test]
    fn too_short_panel() {
        let x: Vec<f64> = (0..6).map(|t| t as f64).collect();
        let y: Vec<f64> = (0..6).map(|t| (t * t) as f64).collect();
        assert!(matches!(fit_corr(&panel(vec![x, y]), ModelKind::Dcc), Err(Error::TooShort { .. })));
    }
}

//! ARMA(p, q) by conditional Gaussian maximum likelihood.
//!
//! Pre-sample deviations from the mean and pre-sample innovations are zero,
//! so the residual vector has the same length as the input. The variance is
//! concentrated out of the likelihood.

use std::fmt;

use nalgebra::{DMatrix, Schur};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{bfgs, BfgsOptions};
use crate::stats::{is_degenerate, mean, variance, LN_2PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArmaSpec {
    pub p: usize,
    pub q: usize,
}

impl ArmaSpec {
    pub const WHITE_NOISE: ArmaSpec = ArmaSpec { p: 0, q: 0 };

    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    /// Mean, AR, MA and innovation variance.
    pub fn n_params(&self) -> usize {
        self.p + self.q + 2
    }
}

impl fmt::Display for ArmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ARMA({},{})", self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaFit {
    pub spec: ArmaSpec,
    /// Process mean μ in `(y_t − μ) = Σφ(y_{t−i} − μ) + e_t + Σθ e_{t−j}`.
    pub mean: f64,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub sigma2: f64,
    pub residuals: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub converged: bool,
}

/// Largest modulus among the inverse roots of `1 − Σ c_i z^i` (the
/// companion-matrix eigenvalues). Stationary/invertible iff < 1.
pub fn max_inverse_root(coeffs: &[f64]) -> f64 {
    match coeffs.len() {
        0 => 0.0,
        1 => coeffs[0].abs(),
        k => {
            let companion = DMatrix::from_fn(k, k, |i, j| {
                if i == 0 {
                    coeffs[j]
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            // bounded Schur iterations; an unconverged decomposition counts
            // as non-stationary so the optimizer steps away from it
            match Schur::try_new(companion, f64::EPSILON, 1000) {
                Some(schur) => schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
                None => f64::INFINITY,
            }
        }
    }
}

fn residuals_into(y: &[f64], mu: f64, ar: &[f64], ma: &[f64], out: &mut [f64]) {
    for t in 0..y.len() {
        let mut e = y[t] - mu;
        for (i, phi) in ar.iter().enumerate() {
            if t > i {
                e -= phi * (y[t - i - 1] - mu);
            }
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                e -= theta * out[t - j - 1];
            }
        }
        out[t] = e;
    }
}

const ROOT_MARGIN: f64 = 0.999;

fn neg_avg_loglik(z: &[f64], spec: ArmaSpec, theta: &[f64], buf: &mut [f64]) -> Option<f64> {
    let (mu, rest) = theta.split_first()?;
    let (ar, ma) = rest.split_at(spec.p);
    if max_inverse_root(ar) >= ROOT_MARGIN {
        return None;
    }
    // MA must be invertible for the residual recursion to stay bounded
    let neg_ma: Vec<f64> = ma.iter().map(|v| -v).collect();
    if max_inverse_root(&neg_ma) >= ROOT_MARGIN {
        return None;
    }
    residuals_into(z, *mu, ar, ma, buf);
    let s2 = buf.iter().map(|e| e * e).sum::<f64>() / z.len() as f64;
    if !(s2 > 0.0) || !s2.is_finite() {
        return None;
    }
    Some(0.5 * (LN_2PI + s2.ln() + 1.0))
}

fn starts(spec: ArmaSpec) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut zero = vec![0.0; 1 + spec.p + spec.q];
    out.push(zero.clone());
    if spec.p + spec.q > 0 {
        for v in &mut zero[1..] {
            *v = 0.1;
        }
        out.push(zero.clone());
        let mut alt = vec![0.0; 1 + spec.p + spec.q];
        if spec.p > 0 {
            alt[1] = 0.5;
        }
        if spec.q > 0 {
            alt[1 + spec.p] = -0.3;
        }
        out.push(alt);
    }
    out
}

/// Conditional maximum-likelihood ARMA fit with up to three fixed starts.
pub fn fit_arma(series: &[f64], spec: ArmaSpec) -> Result<ArmaFit> {
    if spec.p > 10 || spec.q > 10 {
        return Err(Error::InvalidInput(format!("unsupported order {spec}")));
    }
    let n = series.len();
    if n < spec.n_params() + 10 {
        return Err(Error::TooShort {
            needed: spec.n_params() + 10,
            got: n,
        });
    }
    if is_degenerate(series) {
        return Err(Error::ZeroVariance("ARMA input".into()));
    }
    // fit on the standardized series, map back afterwards
    let ybar = mean(series);
    let sd = variance(series).sqrt();
    let z: Vec<f64> = series.iter().map(|v| (v - ybar) / sd).collect();

    let opts = BfgsOptions::default();
    let mut best: Option<crate::optim::Minimum> = None;
    for x0 in starts(spec) {
        let f = |theta: &[f64]| {
            let mut buf = vec![0.0; n];
            neg_avg_loglik(&z, spec, theta, &mut buf)
        };
        if let Some(m) = bfgs(f, &x0, &opts) {
            let better = match &best {
                None => true,
                Some(b) => m.value < b.value,
            };
            if better {
                best = Some(m);
            }
        }
    }
    let best = best.ok_or_else(|| Error::NonConvergence(format!("{spec}: no feasible start")))?;

    let mu = ybar + sd * best.x[0];
    let ar = best.x[1..1 + spec.p].to_vec();
    let ma = best.x[1 + spec.p..].to_vec();
    let mut residuals = vec![0.0; n];
    residuals_into(series, mu, &ar, &ma, &mut residuals);
    let sigma2 = residuals.iter().map(|e| e * e).sum::<f64>() / n as f64;
    let loglik = -0.5 * n as f64 * (LN_2PI + sigma2.ln() + 1.0);
    Ok(ArmaFit {
        spec,
        mean: mu,
        ar_coeffs: ar,
        ma_coeffs: ma,
        sigma2,
        residuals,
        loglik,
        aic: 2.0 * spec.n_params() as f64 - 2.0 * loglik,
        converged: best.converged,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmaSelection {
    pub spec: ArmaSpec,
    pub fit: ArmaFit,
    /// Every grid cell with its AIC, `None` where the fit failed.
    pub candidates: Vec<(ArmaSpec, Option<f64>)>,
}

/// Grid search over `p ≤ p_max`, `q ≤ q_max` by AIC. Ties go to the
/// smaller `p + q`, then the smaller `q`.
pub fn select_arma(series: &[f64], p_max: usize, q_max: usize) -> Result<ArmaSelection> {
    let grid: Vec<ArmaSpec> = (0..=p_max)
        .flat_map(|p| (0..=q_max).map(move |q| ArmaSpec::new(p, q)))
        .collect();
    let fits: Vec<Option<ArmaFit>> = grid.par_iter().map(|s| fit_arma(series, *s).ok()).collect();

    let mut best: Option<&ArmaFit> = None;
    for fit in fits.iter().flatten() {
        let replace = match best {
            None => true,
            Some(b) => {
                let key = |f: &ArmaFit| (f.spec.p + f.spec.q, f.spec.q);
                fit.aic < b.aic || (fit.aic == b.aic && key(fit) < key(b))
            }
        };
        if replace {
            best = Some(fit);
        }
    }
    let fit = best
        .cloned()
        .ok_or_else(|| Error::NonConvergence("every ARMA candidate failed".into()))?;
    Ok(ArmaSelection {
        spec: fit.spec,
        candidates: grid.iter().zip(&fits).map(|(s, f)| (*s, f.as_ref().map(|f| f.aic))).collect(),
        fit,
    })
}

pub fn select_arma_order(series: &[f64], p_max: usize, q_max: usize) -> Result<ArmaSpec> {
    select_arma(series, p_max, q_max).map(|s| s.spec)
}

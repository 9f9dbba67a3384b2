//! Correlation targeting: R̄ as the fixed point of the sample correlation of
//! `Q̃_t ε_t` along the filtered path.

use serde::{Deserialize, Serialize};

use super::filter::Recursion;
use super::CorrModel;
use crate::error::{Error, Result};
use crate::linalg::RowMatrix;
use crate::stats::{correlation_matrix, covariance_to_correlation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetingOptions {
    /// Stop when the largest entrywise change falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TargetingOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Targeting {
    /// Row-major N×N, unit diagonal.
    pub r_bar: Vec<f64>,
    pub iterations: usize,
    /// Largest entrywise change at the last iteration.
    pub residual: f64,
    pub converged: bool,
}

/// Sample correlation of `Q̃_t ε_t` with the recursion driven by `r_bar`.
/// `None` when the recursion breaks down.
fn corrected_correlation(eps: &RowMatrix, model: &CorrModel, r_bar: &[f64]) -> Option<Vec<f64>> {
    let (t_len, n) = (eps.rows(), eps.cols());
    let mut rec = Recursion::new(model, r_bar, n, None);
    let mut sum = vec![0.0; n];
    let mut cross = vec![0.0; n * n];
    for t in 0..t_len {
        rec.check().ok()?;
        let row = eps.row(t);
        let x = rec.scaled_shock(row);
        for i in 0..n {
            sum[i] += x[i];
            for j in 0..=i {
                cross[i * n + j] += x[i] * x[j];
            }
        }
        if t + 1 < t_len {
            rec.advance(row);
        }
    }
    let tf = t_len as f64;
    for i in 0..n {
        for j in 0..=i {
            cross[i * n + j] = cross[i * n + j] / tf - (sum[i] / tf) * (sum[j] / tf);
        }
    }
    if (0..n).any(|i| !(cross[i * n + i] > 0.0)) {
        return None;
    }
    covariance_to_correlation(&mut cross, n);
    cross.iter().all(|v| v.is_finite()).then_some(cross)
}

/// Iterates `R̄ ← corr(Q̃_t ε_t | R̄)` from the sample correlation of `eps`.
/// Non-convergence is reported through the flag; the last iterate is returned.
pub fn target_r_bar(eps: &RowMatrix, model: &CorrModel, opts: &TargetingOptions) -> Result<Targeting> {
    model.validate()?;
    let mut r_bar = correlation_matrix(eps);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let next = corrected_correlation(eps, model, &r_bar).ok_or(Error::NonFinite(iterations))?;
        residual = next.iter().zip(&r_bar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r_bar = next;
        if residual < opts.tol {
            break;
        }
    }
    Ok(Targeting {
        r_bar,
        iterations,
        residual,
        converged: residual < opts.tol,
    })
}

use super::filter::{CorrelationPath, Recursion};
use super::CorrModel;
use crate::error::{Error, Result};
use crate::linalg::{logdet_and_quadratic, RowMatrix};
use crate::stats::LN_2PI;

fn check_lengths(eps: &RowMatrix, path: &CorrelationPath) -> Result<()> {
    if path.len() != eps.rows() || path.n != eps.cols() {
        return Err(Error::InvalidInput(format!(
            "path is {}×{}, panel is {}×{}",
            path.len(),
            path.n,
            eps.rows(),
            eps.cols()
        )));
    }
    Ok(())
}

/// Per-observation contributions `−½ (N log 2π + log|R_t| + ε_t' R_t⁻¹ ε_t)`.
pub fn corr_obs_loglik(eps: &RowMatrix, path: &CorrelationPath) -> Result<Vec<f64>> {
    check_lengths(eps, path)?;
    let n = eps.cols();
    let mut work = vec![0.0; n * n + n];
    (0..eps.rows())
        .map(|t| {
            logdet_and_quadratic(path.r(t), eps.row(t), n, &mut work)
                .map(|(ld, quad)| -0.5 * (n as f64 * LN_2PI + ld + quad))
                .ok_or(Error::NotPositiveDefinite(t))
        })
        .collect()
}

/// Gaussian log-likelihood of de-GARCHed residuals along a correlation path.
pub fn corr_loglik(eps: &RowMatrix, path: &CorrelationPath) -> Result<f64> {
    Ok(corr_obs_loglik(eps, path)?.iter().sum())
}

/// Runs the recursion and accumulates the likelihood in one pass without
/// storing the path. Returns `None` if any R_t is not positive definite or
/// the recursion produces a non-finite value.
pub(crate) fn filtered_loglik(
    eps: &RowMatrix,
    model: &CorrModel,
    r_bar: &[f64],
    mut contributions: Option<&mut Vec<f64>>,
) -> Option<f64> {
    let (t_len, n) = (eps.rows(), eps.cols());
    let mut rec = Recursion::new(model, r_bar, n, None);
    let mut work = vec![0.0; n * n + n];
    let constant = n as f64 * LN_2PI;
    let mut total = 0.0;
    if let Some(c) = contributions.as_deref_mut() {
        c.clear();
    }
    for t in 0..t_len {
        rec.check().ok()?;
        let row = eps.row(t);
        let (ld, quad) = logdet_and_quadratic(&rec.r, row, n, &mut work)?;
        let term = -0.5 * (constant + ld + quad);
        total += term;
        if let Some(c) = contributions.as_deref_mut() {
            c.push(term);
        }
        if t + 1 < t_len {
            rec.advance(row);
        }
    }
    total.is_finite().then_some(total)
}

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volatility::DegarchPanel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingPath {
    pub window: usize,
    /// Date closing each window.
    pub dates: Vec<NaiveDate>,
    /// Column index pairs `(i, j)`, `i < j`.
    pub pairs: Vec<(usize, usize)>,
    pub labels: Vec<String>,
    /// One sequence per pair; `None` where a series is constant inside the window.
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn pair_label(names: &[String], i: usize, j: usize) -> String {
    format!("{}~{}", names[i], names[j])
}

fn window_corr(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let tiny = |s: f64, m: f64| s <= 1e-26 * (m * m * n).max(f64::MIN_POSITIVE);
    if tiny(sxx, mx) || tiny(syy, my) {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation over each trailing window of `window` observations,
/// for every pair of series.
pub fn rolling_correlation(eps: &DegarchPanel, window: usize) -> Result<RollingPath> {
    let t_len = eps.len();
    if window < 2 {
        return Err(Error::InvalidInput("rolling window must be at least 2".into()));
    }
    if t_len < window {
        return Err(Error::TooShort {
            needed: window,
            got: t_len,
        });
    }
    let n = eps.n_series();
    let columns: Vec<Vec<f64>> = (0..n).map(|i| eps.matrix.column(i)).collect();
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
            labels.push(pair_label(&eps.names, i, j));
            values.push(
                (window..=t_len)
                    .map(|end| window_corr(&columns[i][end - window..end], &columns[j][end - window..end]))
                    .collect(),
            );
        }
    }
    Ok(RollingPath {
        window,
        dates: eps.dates[window - 1..].to_vec(),
        pairs,
        labels,
        values,
    })
}

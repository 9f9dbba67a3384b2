//! Augmented Dickey-Fuller test, constant-only deterministic term.
//!
//! Critical values come from MacKinnon (2010) response surfaces and p-values
//! from the MacKinnon (1994) normal-CDF approximation, both for one series
//! with a constant and no trend.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::stats::{is_degenerate, ols_with_intercept};

/// Response-surface coefficients (β∞, β1, β2, β3) at 1%, 5%, 10%.
const CRIT_SURFACE: [(f64, [f64; 4]); 3] = [
    (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
];

const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags_used: usize,
    pub nobs: usize,
    pub p_value: f64,
    /// (level, critical value) for 1%, 5%, 10%.
    pub critical_values: [(f64, f64); 3],
    pub reject_unit_root_at_5pct: bool,
}

impl AdfResult {
    pub fn critical_value(&self, level: f64) -> Option<f64> {
        self.critical_values
            .iter()
            .find(|(l, _)| (l - level).abs() < 1e-12)
            .map(|(_, v)| *v)
    }
}

/// `⌊12·(T/100)^¼⌋`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Finite-sample critical values for a regression with `nobs` observations.
pub fn critical_values(nobs: usize) -> [(f64, f64); 3] {
    let t = nobs as f64;
    CRIT_SURFACE.map(|(level, b)| (level, b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t)))
}

/// Approximate p-value of the ADF t-statistic.
pub fn mackinnon_p_value(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let poly = if stat <= TAU_STAR {
        TAU_SMALLP.iter().rev().fold(0.0, |acc, c| acc * stat + c)
    } else {
        TAU_LARGEP.iter().rev().fold(0.0, |acc, c| acc * stat + c)
    };
    Normal::new(0.0, 1.0).unwrap().cdf(poly)
}

/// Regression of Δy_t on [1, y_{t-1}, Δy_{t-1..t-lags}] over t = first..
fn adf_regression(y: &[f64], dy: &[f64], lags: usize, first: usize) -> Option<crate::stats::OlsFit> {
    // dy[i] = y[i+1] - y[i]; row i of the regression explains dy[i]
    let rows = first..dy.len();
    let target: Vec<f64> = rows.clone().map(|i| dy[i]).collect();
    let mut regs = vec![rows.clone().map(|i| y[i]).collect::<Vec<_>>()];
    for l in 1..=lags {
        regs.push(rows.clone().map(|i| dy[i - l]).collect());
    }
    ols_with_intercept(&target, &regs)
}

/// ADF test with lag order chosen by AIC over `0..=max_lag` on a common
/// sample, then re-estimated on the full sample for the chosen order.
pub fn adf_test(series: &[f64], max_lag: usize) -> Result<AdfResult> {
    if series.len() < max_lag + 10 {
        return Err(Error::TooShort {
            needed: max_lag + 10,
            got: series.len(),
        });
    }
    if is_degenerate(series) {
        return Err(Error::ZeroVariance("ADF input".into()));
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    if is_degenerate(&dy) {
        return Err(Error::ZeroVariance("ADF differenced input".into()));
    }

    let mut best: Option<(f64, usize)> = None;
    for lags in 0..=max_lag {
        let Some(fit) = adf_regression(series, &dy, lags, max_lag) else {
            continue;
        };
        let n = fit.nobs as f64;
        let aic = n * (fit.rss / n).ln() + 2.0 * (lags + 2) as f64;
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, lags));
        }
    }
    let (_, lags) = best.ok_or_else(|| Error::ZeroVariance("ADF regression".into()))?;
    let fit = adf_regression(series, &dy, lags, lags).ok_or_else(|| Error::ZeroVariance("ADF regression".into()))?;
    let statistic = fit.coefficients[1] / fit.std_errors[1];
    let critical_values = critical_values(fit.nobs);
    Ok(AdfResult {
        statistic,
        lags_used: lags,
        nobs: fit.nobs,
        p_value: mackinnon_p_value(statistic),
        reject_unit_root_at_5pct: statistic < critical_values[1].1,
        critical_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn critical_values_are_ordered() {
        for n in [25, 100, 250, 10_000] {
            let cv = critical_values(n);
            assert!(cv[0].1 < cv[1].1 && cv[1].1 < cv[2].1);
        }
        let cv = critical_values(1_000_000);
        assert!((cv[1].1 + 2.86154).abs() < 1e-4);
    }

    #[test]
    fn p_value_at_asymptotic_five_percent() {
        assert!((mackinnon_p_value(-2.86154) - 0.05).abs() < 0.002);
        assert_eq!(mackinnon_p_value(5.0), 1.0);
        assert_eq!(mackinnon_p_value(-30.0), 0.0);
    }

    #[test]
    fn white_noise_rejects_unit_root() {
        let r = adf_test(&noise(250, 1), default_max_lag(250)).unwrap();
        assert!(r.reject_unit_root_at_5pct, "{r:?}");
        assert!(r.p_value < 0.01);
    }

    #[test]
    fn shift_invariance() {
        let x = noise(200, 2);
        let mut walk = vec![0.0];
        for e in &x {
            walk.push(walk.last().unwrap() + e);
        }
        let shifted: Vec<f64> = walk.iter().map(|v| v + 37.5).collect();
        let a = adf_test(&walk, 8).unwrap();
        let b = adf_test(&shifted, 8).unwrap();
        assert_eq!(a.lags_used, b.lags_used);
        assert!((a.statistic - b.statistic).abs() < 1e-10);
    }

    #[test]
    fn constant_series_is_rejected() {
        // a linear ramp minus its trend
        let ramp: Vec<f64> = (0..100).map(|t| 0.5 * t as f64).collect();
        let flat: Vec<f64> = ramp.iter().enumerate().map(|(t, v)| v - 0.5 * t as f64).collect();
        assert!(matches!(adf_test(&flat, 4), Err(Error::ZeroVariance(_))));
        // a pure ramp has constant differences
        assert!(matches!(adf_test(&ramp, 4), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn too_short() {
        assert!(matches!(adf_test(&noise(12, 3), 4), Err(Error::TooShort { .. })));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{chi2_sf, is_degenerate, ols_with_intercept};

pub const DEFAULT_ARCH_LAGS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchLmResult {
    /// `n·R²` of the auxiliary regression, n = T − lags.
    pub statistic: f64,
    pub lags: usize,
    pub p_value: f64,
    pub heteroskedastic_at_5pct: bool,
}

/// Engle's LM test: squared residuals on a constant and their own `lags`
/// lags, statistic `n·R²` referred to χ²(lags).
pub fn arch_lm_test(residuals: &[f64], lags: usize) -> Result<ArchLmResult> {
    if lags == 0 {
        return Err(Error::InvalidInput("ARCH-LM needs at least one lag".into()));
    }
    if residuals.len() < lags + 10 {
        return Err(Error::TooShort {
            needed: lags + 10,
            got: residuals.len(),
        });
    }
    let sq: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    if is_degenerate(residuals) || is_degenerate(&sq) {
        return Err(Error::ZeroVariance("ARCH-LM residuals".into()));
    }
    let y = sq[lags..].to_vec();
    let regs: Vec<Vec<f64>> = (1..=lags).map(|l| sq[lags - l..sq.len() - l].to_vec()).collect();
    let fit = ols_with_intercept(&y, &regs).ok_or_else(|| Error::ZeroVariance("ARCH-LM regression".into()))?;
    let statistic = fit.nobs as f64 * fit.r_squared;
    let p_value = chi2_sf(statistic, lags);
    Ok(ArchLmResult {
        statistic,
        lags,
        p_value,
        heteroskedastic_at_5pct: p_value < 0.05,
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
    fn scale_invariance() {
        let e = noise(500, 9);
        let base = arch_lm_test(&e, 5).unwrap();
        let pow2: Vec<f64> = e.iter().map(|v| v * 4.0).collect();
        assert_eq!(arch_lm_test(&pow2, 5).unwrap().statistic, base.statistic);
        let odd: Vec<f64> = e.iter().map(|v| v * 3.7).collect();
        let s = arch_lm_test(&odd, 5).unwrap().statistic;
        assert!((s - base.statistic).abs() <= 1e-12 * base.statistic.max(1.0));
    }

    #[test]
    fn p_value_in_unit_interval() {
        let r = arch_lm_test(&noise(300, 4), 5).unwrap();
        assert!((0.0..=1.0).contains(&r.p_value));
        assert_eq!(r.heteroskedastic_at_5pct, r.p_value < 0.05);
    }

    #[test]
    fn constant_residuals_error() {
        assert!(matches!(arch_lm_test(&[0.7; 100], 5), Err(Error::ZeroVariance(_))));
        // constant squares: R² undefined
        let alt: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(matches!(arch_lm_test(&alt, 5), Err(Error::ZeroVariance(_))));
    }
}

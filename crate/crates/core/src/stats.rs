//! Descriptive statistics, least squares and χ² helpers shared by the
//! diagnostics and inference modules.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use crate::linalg::RowMatrix;

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divisor n).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// True when the series has no spread relative to its magnitude.
pub fn is_degenerate(xs: &[f64]) -> bool {
    if xs.len() < 2 {
        return true;
    }
    let scale = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
    let v = variance(xs);
    !(v > 1e-24 * scale.max(f64::MIN_POSITIVE)) || !v.is_finite()
}

/// Pearson sample correlation matrix of the columns, row-major N×N with an
/// exact unit diagonal.
pub fn correlation_matrix(panel: &RowMatrix) -> Vec<f64> {
    let (t_len, n) = (panel.rows(), panel.cols());
    let mut means = vec![0.0; n];
    for t in 0..t_len {
        for (m, v) in means.iter_mut().zip(panel.row(t)) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= t_len as f64;
    }
    let mut cov = vec![0.0; n * n];
    let mut dev = vec![0.0; n];
    for t in 0..t_len {
        for (d, (v, m)) in dev.iter_mut().zip(panel.row(t).iter().zip(&means)) {
            *d = v - m;
        }
        for i in 0..n {
            for j in 0..=i {
                cov[i * n + j] += dev[i] * dev[j];
            }
        }
    }
    covariance_to_correlation(&mut cov, n);
    cov
}

/// Rescales the lower triangle of a covariance-like matrix to unit diagonal
/// and mirrors it to a full symmetric matrix.
pub(crate) fn covariance_to_correlation(cov: &mut [f64], n: usize) {
    let sd: Vec<f64> = (0..n).map(|i| cov[i * n + i].sqrt()).collect();
    for i in 0..n {
        for j in 0..i {
            let r = (cov[i * n + j] / (sd[i] * sd[j])).clamp(-1.0, 1.0);
            cov[i * n + j] = r;
            cov[j * n + i] = r;
        }
        cov[i * n + i] = 1.0;
    }
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Coefficient covariance `σ² (X'X)⁻¹`.
    pub covariance: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub rss: f64,
    pub nobs: usize,
}

/// Ordinary least squares of `y` on the columns of `x` (no implicit constant).
pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Option<OlsFit> {
    let n = y.len();
    let k = x.ncols();
    if n <= k {
        return None;
    }
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * x;
    let xtx_inv = xtx.clone().cholesky()?.inverse();
    let beta = &xtx_inv * (x.transpose() * &yv);
    let fitted = x * &beta;
    let resid: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let ybar = mean(y);
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let sigma2 = rss / (n - k) as f64;
    let covariance = xtx_inv * sigma2;
    let std_errors = (0..k).map(|j| covariance[(j, j)].sqrt()).collect();
    Some(OlsFit {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        covariance,
        residuals: resid,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 0.0 },
        rss,
        nobs: n,
    })
}

/// OLS of `y` on a constant plus `regressors`. Columns are centered before
/// solving, so slope estimates are unaffected by level shifts of any input.
/// `coefficients[0]` is the intercept, followed by one slope per regressor.
pub fn ols_with_intercept(y: &[f64], regressors: &[Vec<f64>]) -> Option<OlsFit> {
    let n = y.len();
    let k = regressors.len();
    if n <= k + 1 {
        return None;
    }
    let ybar = mean(y);
    let xbar: Vec<f64> = regressors.iter().map(|c| mean(c)).collect();
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let mut fit = if k == 0 {
        let rss: f64 = yc.iter().map(|e| e * e).sum();
        OlsFit {
            coefficients: vec![],
            std_errors: vec![],
            covariance: DMatrix::zeros(0, 0),
            residuals: yc.clone(),
            r_squared: 0.0,
            rss,
            nobs: n,
        }
    } else {
        let x = DMatrix::from_fn(n, k, |t, j| regressors[j][t] - xbar[j]);
        let mut f = ols(&yc, &x)?;
        // ols() divided by n - k; one more degree of freedom went to the intercept
        let adj = (n - k) as f64 / (n - k - 1) as f64;
        f.covariance *= adj;
        f.std_errors = (0..k).map(|j| f.covariance[(j, j)].sqrt()).collect();
        f
    };
    let intercept = ybar - fit.coefficients.iter().zip(&xbar).map(|(b, m)| b * m).sum::<f64>();
    let sigma2 = fit.rss / (n - k - 1) as f64;
    // centered slopes are uncorrelated with the mean of y
    let xm = DVector::from_column_slice(&xbar);
    let var_intercept = sigma2 / n as f64 + if k > 0 { (xm.transpose() * &fit.covariance * &xm)[(0, 0)] } else { 0.0 };
    fit.coefficients.insert(0, intercept);
    fit.std_errors.insert(0, var_intercept.sqrt());
    Some(fit)
}

/// Upper-tail probability of χ²(dof).
pub fn chi2_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    (1.0 - dist.cdf(x)).clamp(0.0, 1.0)
}

/// χ² critical value at upper-tail level `alpha`.
pub fn chi2_critical(alpha: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    let target = 1.0 - alpha;
    let mut x = dist.inverse_cdf(target);
    // the library quantile is only good to ~1e-5; polish with Newton on the cdf
    for _ in 0..4 {
        let pdf = dist.pdf(x);
        if !(pdf > 0.0) {
            break;
        }
        x -= (dist.cdf(x) - target) / pdf;
    }
    x
}

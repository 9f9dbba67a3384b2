//! White sandwich standard errors from numerical derivatives of
//! per-observation log-likelihood contributions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::invert_spd;

/// Relative step of the central-difference Hessian and forward-difference scores.
pub const DERIVATIVE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    /// Sandwich `H⁻¹ S H⁻¹ / T`. `None` where unavailable.
    pub robust: Vec<Option<f64>>,
    /// Inverse-Hessian standard errors, for comparison.
    pub hessian: Vec<Option<f64>>,
}

/// Sandwich standard errors from the average-log-likelihood Hessian `hessian`
/// (k×k, negative definite at an interior maximum) and the T×k matrix of
/// per-observation scores.
pub fn sandwich_from_parts(hessian: &DMatrix<f64>, scores: &DMatrix<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
    let t = scores.nrows() as f64;
    let info = -hessian;
    let info_inv = invert_spd(&info)?;
    let outer = scores.transpose() * scores / t;
    let cov = &info_inv * outer * &info_inv / t;
    let k = hessian.nrows();
    let robust = (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let plain = (0..k).map(|i| (info_inv[(i, i)] / t).max(0.0).sqrt()).collect();
    Some((robust, plain))
}

/// Robust standard errors at `theta`.
///
/// `obs_loglik` returns the T per-observation contributions (or `None` when
/// the point is infeasible). Coordinates flagged in `pinned` sit on the
/// boundary: they are held fixed and reported with SE 0. `lower` bounds keep
/// difference stencils inside the parameter space.
pub fn robust_se<F>(obs_loglik: F, theta: &[f64], pinned: &[bool], lower: &[f64]) -> StandardErrors
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let k = theta.len();
    let mut robust = vec![None; k];
    let mut hessian_se = vec![None; k];
    for i in 0..k {
        if pinned[i] {
            robust[i] = Some(0.0);
            hessian_se[i] = Some(0.0);
        }
    }
    let mut free: Vec<usize> = (0..k).filter(|&i| !pinned[i]).collect();
    let Some(base) = obs_loglik(theta) else {
        return StandardErrors {
            robust,
            hessian: hessian_se,
        };
    };
    let t_len = base.len() as f64;
    let avg = |v: &[f64]| v.iter().sum::<f64>() / t_len;
    let f0 = avg(&base);

    let steps: Vec<f64> = (0..k)
        .map(|i| {
            let h = DERIVATIVE_STEP * theta[i].abs().max(1.0);
            let room = theta[i] - lower[i];
            if room < 2.0 * h {
                (room / 2.0).max(1e-9)
            } else {
                h
            }
        })
        .collect();
    let eval = |shifts: &[(usize, f64)]| {
        let mut th = theta.to_vec();
        for &(i, d) in shifts {
            th[i] += d;
        }
        obs_loglik(&th)
    };

    loop {
        let m = free.len();
        if m == 0 {
            break;
        }
        let mut hess = DMatrix::zeros(m, m);
        let mut scores = DMatrix::zeros(base.len(), m);
        let mut bad = None;
        'outer: for (a, &i) in free.iter().enumerate() {
            let hi = steps[i];
            let (Some(up), Some(dn)) = (eval(&[(i, hi)]), eval(&[(i, -hi)])) else {
                bad = Some(a);
                break;
            };
            hess[(a, a)] = (avg(&up) - 2.0 * f0 + avg(&dn)) / (hi * hi);
            for (row, (u, b0)) in up.iter().zip(&base).enumerate() {
                scores[(row, a)] = (u - b0) / hi;
            }
            for (c, &j) in free.iter().enumerate().take(a) {
                let hj = steps[j];
                let vals = [
                    eval(&[(i, hi), (j, hj)]),
                    eval(&[(i, hi), (j, -hj)]),
                    eval(&[(i, -hi), (j, hj)]),
                    eval(&[(i, -hi), (j, -hj)]),
                ];
                let [Some(pp), Some(pm), Some(mp), Some(mm)] = vals else {
                    bad = Some(a);
                    break 'outer;
                };
                let v = (avg(&pp) - avg(&pm) - avg(&mp) + avg(&mm)) / (4.0 * hi * hj);
                hess[(a, c)] = v;
                hess[(c, a)] = v;
            }
        }
        if let Some(a) = bad {
            free.remove(a);
            continue;
        }
        if let Some((r, p)) = sandwich_from_parts(&hess, &scores) {
            for (a, &i) in free.iter().enumerate() {
                robust[i] = Some(r[a]);
                hessian_se[i] = Some(p[a]);
            }
            break;
        }
        // singular information: drop the flattest coordinate and retry
        let flattest = (0..m)
            .min_by(|&x, &y| hess[(x, x)].abs().total_cmp(&hess[(y, y)].abs()))
            .expect("m > 0");
        free.remove(flattest);
    }
    StandardErrors {
        robust,
        hessian: hessian_se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance, LN_2PI};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn gaussian_mean_matches_closed_form() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let d = Normal::new(1.5, 2.0).unwrap();
        let x: Vec<f64> = (0..2000).map(|_| d.sample(&mut rng)).collect();
        let (m, v) = (mean(&x), variance(&x));
        // mean parameter, variance fixed at its estimate
        let obs = |th: &[f64]| Some(x.iter().map(|xi| -0.5 * (LN_2PI + v.ln() + (xi - th[0]).powi(2) / v)).collect());
        let se = robust_se(obs, &[m], &[false], &[f64::NEG_INFINITY]);
        let oracle = v.sqrt() / (x.len() as f64).sqrt();
        let r = se.robust[0].unwrap();
        assert!((r / oracle - 1.0).abs() < 0.10, "{r} vs {oracle}");
    }

    #[test]
    fn pinned_coordinate_reports_zero() {
        let obs = |th: &[f64]| Some(vec![-(th[0] - 1.0).powi(2) - th[1].powi(2); 10]);
        let se = robust_se(obs, &[1.0, 0.0], &[false, true], &[f64::NEG_INFINITY, 0.0]);
        assert_eq!(se.robust[1], Some(0.0));
    }

    #[test]
    fn flat_direction_is_unavailable() {
        // second coordinate does not enter the likelihood
        let obs = |th: &[f64]| Some((0..50).map(|t| -((t as f64 / 50.0) - th[0]).powi(2)).collect());
        let se = robust_se(obs, &[0.49, 0.3], &[false, false], &[f64::NEG_INFINITY; 2]);
        assert!(se.robust[0].is_some());
        assert!(se.robust[1].is_none());
    }
}

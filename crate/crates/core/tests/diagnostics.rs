//! Monte Carlo behaviour of the first-step diagnostics.

mod common;

use rand::Rng;
use rand_distr::StandardNormal;

use common::rng;
use condcorr::diagnostics::{adf_test, default_max_lag, fit_arma, max_inverse_root, select_arma, ArmaSpec};

fn noise(seed: u64, t: usize) -> Vec<f64> {
    let mut g = rng(seed);
    (0..t).map(|_| g.sample(StandardNormal)).collect()
}

#[test]
fn adf_rejects_white_noise() {
    let reps = 200;
    let rejected = (0..reps)
        .filter(|&k| adf_test(&noise(10_000 + k, 250), default_max_lag(250)).unwrap().reject_unit_root_at_5pct)
        .count();
    assert!(rejected as f64 / reps as f64 > 0.99, "{rejected}/{reps}");
}

#[test]
fn adf_critical_values_are_ordered() {
    let r = adf_test(&noise(1, 250), 4).unwrap();
    let cv: Vec<f64> = r.critical_values.iter().map(|c| c.1).collect();
    assert!(cv[0] < cv[1] && cv[1] < cv[2] && cv[2] < 0.0, "{cv:?}");
}

#[test]
fn aic_prefers_white_noise_over_ar1_at_the_lr_rate() {
    // AIC(0,0) <= AIC(1,0) iff the one-restriction LR is <= 2: P = 0.843
    let reps = 400;
    let wins = (0..reps)
        .filter(|&k| {
            let y = noise(20_000 + k, 300);
            fit_arma(&y, ArmaSpec::new(0, 0)).unwrap().aic <= fit_arma(&y, ArmaSpec::new(1, 0)).unwrap().aic
        })
        .count();
    let rate = wins as f64 / reps as f64;
    assert!((0.80..=0.89).contains(&rate), "{rate}");
}

#[test]
fn ar1_is_identified() {
    let reps = 60;
    let mut found = 0;
    for k in 0..reps {
        let e = noise(30_000 + k, 300);
        let y: Vec<f64> = e.iter().scan(0.0, |s, v| { *s = 0.6 * *s + v; Some(*s) }).collect();
        let sel = select_arma(&y, 3, 3).unwrap();
        assert_eq!(sel.fit.residuals.len(), y.len());
        assert!(max_inverse_root(&sel.fit.ar_coeffs) < 1.0);
        assert_eq!(sel.candidates.len(), 16);
        found += (sel.spec.p >= 1) as usize;
    }
    assert!(found as f64 / reps as f64 >= 0.95, "{found}/{reps}");
}

//! The arithmetic behind the second table: per-observation AIC, LR
//! statistics and their 10% critical values, starting from stored
//! log-likelihoods.
//!
//! ```text
//! cargo run --example table2_arithmetic -- [L_CCC] [L_DCC] [L_NLARC] [T]
//! ```

use condcorr::correlation::ModelKind;
use condcorr::inference::{aic, chi2_critical_10pct, lr_test};
use condcorr::pipeline::fmt3;

fn main() -> condcorr::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (l_ccc, l_dcc, l_nlarc, t) = match args[..] {
        [a, b, c, t] => (a, b, c, t as usize),
        _ => (-409.454, -406.795, -406.725, 166),
    };

    println!("{:<7} {:>12} {:>3} {:>8}", "model", "loglik", "k", "AIC");
    for (kind, l) in [(ModelKind::Ccc, l_ccc), (ModelKind::Dcc, l_dcc), (ModelKind::Nlarc, l_nlarc)] {
        let k = kind.n_params();
        println!("{:<7} {:>12} {k:>3} {:>8}", kind.label(), fmt3(l), fmt3(aic(l, k, t)));
    }

    for (label, l_r, l_u, dof) in [("DCC vs CCC", l_ccc, l_dcc, 2), ("NLARC vs DCC", l_dcc, l_nlarc, 1)] {
        let lr = lr_test(l_r, l_u, dof)?;
        println!(
            "\n{label}: LR = 2 x ({} - ({})) = {}\n  chi2(0.1, {}) = {}, p = {}, {}",
            fmt3(l_u),
            fmt3(l_r),
            fmt3(lr.statistic),
            lr.dof,
            fmt3(chi2_critical_10pct(lr.dof)),
            fmt3(lr.p_value),
            if lr.reject { "reject" } else { "do not reject" }
        );
    }
    Ok(())
}

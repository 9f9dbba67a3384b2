//! Per-series diagnostics: ADF on the level, ARMA order by AIC, ARCH-LM on
//! the ARMA residuals.
//!
//! ```text
//! cargo run --release --example diagnostics
//! ```

use condcorr::diagnostics::{adf_test, arch_lm_test, default_max_lag, select_arma, DEFAULT_ARCH_LAGS};
use condcorr::pipeline::fmt3;
use condcorr::simulation::{simulate_garch, SimSpec};
use condcorr::volatility::GarchParams;

fn main() -> condcorr::Result<()> {
    let t = 500;
    let shocks = simulate_garch(&SimSpec::garch(GarchParams::new(0.05, 0.10, 0.85)?, t, 7))?;

    // a random walk, an AR(1) around 2 and the heteroskedastic shocks themselves
    let walk: Vec<f64> = shocks.iter().scan(0.0, |s, e| { *s += e; Some(*s) }).collect();
    let ar1: Vec<f64> = shocks.iter().scan(2.0, |y, e| { *y = 2.0 + 0.6 * (*y - 2.0) + 0.3 * e; Some(*y) }).collect();

    for (name, y) in [("walk", &walk), ("ar1", &ar1), ("shocks", &shocks)] {
        let adf = adf_test(y, default_max_lag(y.len()))?;
        let work: Vec<f64> = if adf.reject_unit_root_at_5pct {
            y.to_vec()
        } else {
            y.windows(2).map(|w| w[1] - w[0]).collect()
        };
        let sel = select_arma(&work, 3, 3)?;
        let lm = arch_lm_test(&sel.fit.residuals, DEFAULT_ARCH_LAGS)?;
        println!(
            "{name:<7} ADF {:>8} (p {})  {:<10} {}  ARCH-LM p {}{}",
            fmt3(adf.statistic),
            fmt3(adf.p_value),
            if adf.reject_unit_root_at_5pct { "level" } else { "difference" },
            sel.spec,
            fmt3(lm.p_value),
            if lm.heteroskedastic_at_5pct { "  -> GARCH(1,1)" } else { "" },
        );
    }
    Ok(())
}

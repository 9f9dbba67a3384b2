//! Monte Carlo recovery of a bivariate DCC with GARCH(1,1) variance layers.
//!
//! ```text
//! cargo run --release --example recovery -- [replications] [T]
//! ```

use std::time::Instant;

use condcorr::correlation::DccParams;
use condcorr::simulation::{recovery_experiment, SimSpec};
use condcorr::volatility::GarchParams;

fn main() -> condcorr::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let t: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);

    let layer = GarchParams::new(0.1, 0.05, 0.90)?;
    let spec = SimSpec::dcc(DccParams::new(0.05, 0.90)?, SimSpec::equicorrelation(2, 0.5), 2, t, 2024)
        .with_garch_layers(vec![Some(layer), Some(layer)]);

    let start = Instant::now();
    let report = recovery_experiment(&spec, reps)?;
    println!("{reps} replications, T = {t}, {:.1}s", start.elapsed().as_secs_f64());
    println!("failures {}, converged {}", report.failures, report.converged);
    println!("{:<10} {:>8} {:>10} {:>9} {:>8} {:>8}", "param", "truth", "mean", "rmse", "cov2se", "cov3se");
    for s in &report.summaries {
        println!(
            "{:<10} {:>8.4} {:>10.4} {:>9.4} {:>8.2} {:>8.2}",
            s.name,
            s.truth.unwrap_or(f64::NAN),
            s.mean_estimate,
            s.rmse.unwrap_or(f64::NAN),
            s.coverage_2se.unwrap_or(f64::NAN),
            s.coverage_3se.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

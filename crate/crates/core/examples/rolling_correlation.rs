//! Five-day rolling correlations next to the fitted DCC path.
//!
//! ```text
//! cargo run --release --example rolling_correlation -- [window]
//! ```

use chrono::NaiveDate;
use condcorr::correlation::{fit_corr, DccParams, ModelKind};
use condcorr::inference::rolling_correlation;
use condcorr::simulation::{business_days, simulate_corr_panel, SimSpec};
use condcorr::volatility::{DegarchPanel, ScaleSource};

fn main() -> condcorr::Result<()> {
    let window: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let t = 250;
    let spec = SimSpec::dcc(DccParams::new(0.08, 0.88)?, SimSpec::equicorrelation(2, 0.3), 2, t, 99);
    let sim = simulate_corr_panel(&spec)?;
    let eps = DegarchPanel {
        dates: business_days(NaiveDate::from_ymd_opt(2019, 1, 2).unwrap(), t),
        names: vec!["x".into(), "y".into()],
        matrix: sim.eps,
        scale: vec![ScaleSource::Unconditional; 2],
    };

    let rolling = rolling_correlation(&eps, window)?;
    let dcc = fit_corr(&eps, ModelKind::Dcc)?;
    let fitted = dcc.path().pair(0, 1);
    let truth = sim.path.pair(0, 1);

    println!("{} windows of {window}; pair {}", rolling.dates.len(), rolling.labels[0]);
    println!("{:<12} {:>8} {:>8} {:>8}", "date", "rolling", "DCC", "true");
    let offset = t - rolling.dates.len();
    for (k, d) in rolling.dates.iter().enumerate().step_by(20) {
        let r = rolling.values[0][k].map_or("n/a".to_string(), |v| format!("{v:.3}"));
        println!("{d:<12} {r:>8} {:>8.3} {:>8.3}", fitted[k + offset], truth[k + offset]);
    }
    let spread = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let roll: Vec<f64> = rolling.values[0].iter().flatten().copied().collect();
    println!("\nstd dev over time: rolling {:.3}, DCC {:.3}, true {:.3}", spread(&roll), spread(&fitted), spread(&truth));
    Ok(())
}

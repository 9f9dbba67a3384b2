//! Fit GARCH(1,1) to a simulated series and de-GARCH it.
//!
//! ```text
//! cargo run --release --example garch_first_step -- [T] [seed]
//! ```

use condcorr::pipeline::{fmt3, fmt_se};
use condcorr::simulation::{simulate_garch, SimSpec};
use condcorr::stats::{mean, variance};
use condcorr::volatility::{degarch, fit_garch, GarchParams};

fn main() -> condcorr::Result<()> {
    let mut args = std::env::args().skip(1);
    let t: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(11);

    let truth = GarchParams::new(0.1, 0.08, 0.88)?;
    let y = simulate_garch(&SimSpec::garch(truth, t, seed))?;
    let fit = fit_garch(&y)?;

    println!("T = {t}, converged {}", fit.converged);
    println!("{:<6} {:>7} {:>9} {:>9}", "", "truth", "estimate", "se");
    for (k, (name, tv, ev)) in [
        ("omega", truth.omega, fit.params.omega),
        ("alpha", truth.alpha, fit.params.alpha),
        ("beta", truth.beta, fit.params.beta),
    ]
    .into_iter()
    .enumerate()
    {
        println!("{name:<6} {:>7} {:>9} {:>9}", fmt3(tv), fmt3(ev), fmt_se(fit.std_errors[k]));
    }
    println!("log-likelihood {}", fmt3(fit.loglik));

    let e = degarch(&y, &fit)?;
    let sq: Vec<f64> = e.iter().map(|v| v * v).collect();
    println!("de-GARCHed: mean {}, variance {}, mean square {}", fmt3(mean(&e)), fmt3(variance(&e)), fmt3(mean(&sq)));
    Ok(())
}

//! Convergence on the two-node quadratic: mean squared distance to the
//! optimum for three step-size scales, against `2 (k+1)^(-1/2)`.
//!
//! cargo run --release --example toy_convergence [replications]

use dosp::analysis::{monte_carlo_divergence, theorem5_envelope};
use dosp::{AlgoConfig, Objective, PowerLawSchedule, QuadraticToy};

fn main() -> dosp::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let toy = QuadraticToy::default();
    let a_star = toy.optimum().expect("closed form");
    for beta0 in [0.23, 0.28, 0.5] {
        let schedule = PowerLawSchedule::shifted(beta0, 0.75, 1.0, 0.25)?;
        let config = AlgoConfig::dosp(schedule).with_bounds(toy.default_bounds());
        let d = monte_carlo_divergence(&config, &toy, 100_000, replications, 1, &a_star)?;
        println!("beta0 = {beta0}");
        for k in [10, 100, 1_000, 10_000, 99_999] {
            let j = d.position(k).expect("recorded");
            println!(
                "  k = {k:>6}  D = {:.3e} +- {:.1e}  envelope {:.3e}",
                d.values[j],
                d.stderr[j],
                theorem5_envelope(&schedule, 2.0, k)
            );
        }
    }
    Ok(())
}

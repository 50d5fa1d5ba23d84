//! One-step recursion of the mean squared distance, checked on measured
//! series: `D_{k+1} <= (1 - A beta gamma) D_k + B beta gamma^2 sqrt(D_k) + C beta^2`,
//! with `C` taken from the measured second moment of the update direction.
//!
//! cargo run --release --example recursion_check [replications]

use dosp::analysis::{lemma4_recursion_check, monte_carlo, MEstimate, MonteCarlo, RateConstants, DEFAULT_M_SAFETY};
use dosp::schedules::contraction_index;
use dosp::{AlgoConfig, Objective, PowerLawSchedule, QuadraticToy, RecordSchedule};

fn main() -> dosp::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let toy = QuadraticToy::default();
    let schedule = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25)?;
    let config = AlgoConfig::dosp(schedule).with_bounds(toy.default_bounds());
    let mc = MonteCarlo::new(replications, 11).with_record(RecordSchedule::Every);
    let a_star = toy.optimum().expect("closed form");
    let series = monte_carlo(&config, &toy, 10_000, Some(&a_star), &mc)?;
    let m = MEstimate::from_series(&series.gradient_sq_norm.mean, DEFAULT_M_SAFETY)?;
    let constants = RateConstants::complete(2, 2.0, 1.0, 1.0, 1.0, m)?;
    let k0 = contraction_index(&schedule, constants.a, 0)?;
    let d = series.divergence.as_ref().expect("optimum supplied");
    let rows = lemma4_recursion_check(&series.ks, &d.mean, &d.stderr, &schedule, &constants, k0, 10_000, 4.0)?;
    let held = rows.iter().filter(|r| r.holds).count();
    println!("M = {:.3}, K0 = {k0}: recursion holds at {held} of {} iterations", m.value, rows.len());
    for r in rows.iter().step_by(2_000) {
        println!("  k = {:>5}: D_(k+1) = {:.4e} <= {:.4e}", r.k, r.lhs, r.rhs);
    }
    Ok(())
}

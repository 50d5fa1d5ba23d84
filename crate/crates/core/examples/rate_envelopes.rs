//! Rate envelopes for a schedule: the contraction index, both general-rate
//! branches, the fast-rate condition, and the scalar inequality behind the
//! rate exponent.
//!
//! cargo run --release --example rate_envelopes

use dosp::analysis::{lemma7_check, theorem4_envelopes, MEstimate, RateConstants};
use dosp::schedules::{rate_diagnostics, theorem5_condition};
use dosp::PowerLawSchedule;

fn main() -> dosp::Result<()> {
    // Quadratic with curvature 1, two nodes, unit sign perturbations.
    let m = MEstimate::configured(30.0)?;
    let constants = RateConstants::complete(2, 2.0, 1.0, 1.0, 1.0, m)?;
    for (beta0, nu1, nu2) in [(0.5, 0.75, 0.25), (0.23, 0.75, 0.25), (0.4, 0.65, 0.35)] {
        let schedule = PowerLawSchedule::shifted(beta0, nu1, 1.0, nu2)?;
        let diag = rate_diagnostics(&schedule, constants.a, 0, 100_000)?;
        let env = theorem4_envelopes(&diag, &constants, 1.0, &schedule)?;
        let fast = theorem5_condition(&schedule, constants.a)?;
        println!("beta0 = {beta0}, nu = ({nu1}, {nu2}): K0 = {}, exponent {}", diag.k0, diag.exponent);
        println!("  theta: {:?}\n  rho:   {:?}", env.theta, env.rho);
        println!("  fast rate needs beta0 gamma0 >= {:.3}: {}", fast.threshold, fast.holds);
        for k in [100, 10_000] {
            let p = env.at(k)?;
            println!("  k = {k}: theta {:?} rho {:?} floor {:.3e}", p.theta, p.rho, p.lemma5_floor);
        }
    }
    for x in [1.0, 0.1, 1e-4, 1e-8] {
        let (g, holds) = lemma7_check(1.0, 0.5, x)?;
        println!("g({x:e}) = {g:.9} < 0.5: {holds}");
    }
    Ok(())
}

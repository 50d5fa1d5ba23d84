//! Four-link power control with a proportional-fair utility: perturbation
//! ascent against a sinusoidal-perturbation baseline and exact-gradient ascent.
//! Prints the mean utility per node over iterations.
//!
//! cargo run --release --example power_control [replications]

use dosp::analysis::{monte_carlo, MonteCarlo};
use dosp::{AlgoConfig, Objective, PowerControl, PowerLawSchedule, SineParams};

fn main() -> dosp::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let model = PowerControl::proportional_fair(4)?;
    let schedule = PowerLawSchedule::new(2.5, 0.75, 12.0, 0.25, 0)?;
    let bounds = model.default_bounds();
    let variants = [
        ("perturbation", AlgoConfig::dosp(schedule)),
        ("sine", AlgoConfig::sine(schedule, SineParams::reference_four_node())),
        ("exact gradient", AlgoConfig::exact_gradient(schedule)),
    ];
    let mc = MonteCarlo::new(replications, 5);
    let checkpoints = [1, 10, 100, 1_000, 10_000];
    print!("{:>15}", "k");
    for k in checkpoints {
        print!("{k:>9}");
    }
    println!();
    for (name, config) in variants {
        let series = monte_carlo(&config.with_bounds(bounds.clone()), &model, 10_000, None, &mc)?;
        print!("{name:>15}");
        for k in checkpoints {
            let j = series.ks.binary_search(&k).expect("recorded");
            print!("{:>9.3}", series.utility_per_node.mean[j]);
        }
        println!();
    }
    Ok(())
}

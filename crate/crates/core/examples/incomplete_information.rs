//! Partial utility exchange: every node hears each other node with
//! probability `p` and extrapolates the global utility from what it heard.
//! Lower `p` means a noisier estimate and a slower approach to the optimum.
//!
//! cargo run --release --example incomplete_information

use dosp::algorithm::step_dosp_incomplete;
use dosp::analysis::monte_carlo_divergence;
use dosp::{AlgoConfig, ExchangeModel, Objective, PowerLawSchedule, QuadraticToy, RunState, Streams};

fn main() -> dosp::Result<()> {
    let toy = QuadraticToy::default();
    let schedule = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25)?;

    // One step by hand.
    let config = AlgoConfig::incomplete(schedule, ExchangeModel::new(0.5)?).with_bounds(toy.default_bounds());
    let mut streams = Streams::from_seed(7);
    let mut state = RunState::new(&config, vec![0.5, 2.0])?;
    let rec = step_dosp_incomplete(&mut state, &config, &toy, &mut streams)?;
    println!("phi = {:?}, estimates = {:?}", rec.phi, rec.observation);
    println!("a_0 = {:?} -> a_1 = {:?}\n", rec.nominal_action, state.a);

    let a_star = toy.optimum().expect("closed form");
    for p in [1.0, 0.5, 0.25, 0.1] {
        let exchange = ExchangeModel::new(p)?;
        let q = exchange.q_nonempty(2)?;
        let config = AlgoConfig::incomplete(schedule, exchange).with_bounds(toy.default_bounds());
        let d = monte_carlo_divergence(&config, &toy, 10_000, 200, 2, &a_star)?;
        let mean = d.window_mean_ratio(1_000, 10_000, |_| 1.0).expect("window");
        println!("p = {p:<4}  q = {:.3}  mean D over [1e3, 1e4] = {mean:.4e}", q.q_derived);
    }
    Ok(())
}

//! Bias of the perturbation gradient estimate on the quadratic, against the
//! first-order bias bound. For a quadratic the bias is exactly zero, so the
//! estimates should sit within a few standard errors of it.
//!
//! cargo run --release --example bias_check

use dosp::analysis::{bias_bound_at, empirical_bias};
use dosp::{Objective, PerturbationModel, QuadraticToy, Streams};

fn main() -> dosp::Result<()> {
    let toy = QuadraticToy::default();
    let perturbation = PerturbationModel::default();
    let m = perturbation.moments();
    let mut rng = Streams::from_seed(4).perturbation;
    for a in [[0.0, 0.0], [2.0, 1.0], [0.5, 2.5]] {
        for gamma in [1.0, 0.5, 0.1] {
            let b = empirical_bias(&toy, &a, gamma, &perturbation, None, 200_000, &mut rng)?;
            let bound = bias_bound_at(gamma, 2, toy.hessian_bound().expect("known"), m.alpha2, m.alpha3)?;
            println!(
                "a = {a:?} gamma = {gamma:<4} |b| = {:.4} (se {:.4})  bound {bound:.3}",
                b.norm(),
                b.stderr_norm()
            );
        }
    }
    Ok(())
}

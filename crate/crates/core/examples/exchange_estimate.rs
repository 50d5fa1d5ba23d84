//! Expectation of a node's partial-exchange estimate, by enumerating every
//! subset of heard nodes. It equals `q` times the global utility, with `q`
//! the probability of hearing at least one other node.
//!
//! cargo run --example exchange_estimate

use dosp::exchange::{incomplete_estimate, lemma3_enumeration_oracle};
use dosp::ExchangeModel;

fn main() -> dosp::Result<()> {
    let u = [1.0, 2.0, 3.0, 4.0];
    let total: f64 = u.iter().sum();
    println!("node 0 hears {{1, 3}}: estimate {}", incomplete_estimate(0, &u, &[1, 3])?);
    println!("node 0 hears nobody:  estimate {}\n", incomplete_estimate(0, &u, &[])?);
    println!("{:>5} {:>12} {:>12} {:>16}", "p", "E[estimate]", "q * sum", "(1-(1-p)^N) sum");
    for p in [0.1, 0.25, 0.5, 0.9, 1.0] {
        let q = ExchangeModel::new(p)?.q_nonempty(u.len())?;
        let e = lemma3_enumeration_oracle(0, &u, p)?;
        println!("{p:>5} {e:>12.6} {:>12.6} {:>16.6}", q.q_derived * total, q.q_paper * total);
    }
    Ok(())
}

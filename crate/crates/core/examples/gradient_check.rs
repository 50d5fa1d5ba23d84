//! Analytic per-sample gradients of the power-control utilities against
//! central finite differences.
//!
//! cargo run --release --example gradient_check

use dosp::experiment::gradient_relative_error;
use dosp::{PowerControl, PowerUtility};

fn main() -> dosp::Result<()> {
    for utility in [PowerUtility::ProportionalFair, PowerUtility::SumRate] {
        for n in [2, 4, 10] {
            let model = PowerControl::new(utility, n)?;
            let err = gradient_relative_error(&model, 100, 1)?;
            println!("{utility:?} n = {n:>2}: max relative error {err:.2e}");
        }
    }
    Ok(())
}

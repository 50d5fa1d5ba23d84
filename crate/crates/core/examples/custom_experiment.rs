//! An experiment described in configuration text, run with CSV and summary
//! output. The same text saved to a file runs with `dosp run <file>`.
//!
//! cargo run --release --example custom_experiment [out-dir]

use dosp::experiment::{run_experiment, ExperimentSpec, RunOptions};

const CONFIG: &str = "
objective.kind = toy
nu1 = 0.75
nu2 = 0.25
gamma0 = 1
algo.horizon = 20000
replications = 200
seed = 9
runs = slow, fast
run.slow.beta0 = 0.1
run.fast.beta0 = 0.5
";

fn main() -> dosp::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/custom".into());
    let spec = ExperimentSpec::parse("custom", CONFIG)?;
    for r in &spec.validate(false)?.runs {
        println!("{}: schedule conditions hold: {}", r.label, r.a4.is_valid());
    }
    let options = RunOptions {
        out_dir: Some(out.clone().into()),
        ..Default::default()
    };
    let summary = run_experiment(&spec, &options)?;
    for run in &summary.runs {
        println!(
            "{}: final D = {:.3e}, fitted envelope constant {:.3}",
            run.label, run.final_divergence, run.envelope_omega
        );
    }
    println!("files in {out}: {}", summary.files.join(", "));
    Ok(())
}

//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines are always shown. Set
//! `ACCEPTANCE_ONLY=1,9` to run a subset.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use dosp::algorithm::{run, run_from, RecordSchedule};
use dosp::analysis::{lemma4_recursion_check, monte_carlo, MEstimate, MonteCarlo, RateConstants, DEFAULT_M_SAFETY};
use dosp::experiment::{builtin, list_experiments, run_experiment, ExperimentKind, RunOptions, Summary};
use dosp::schedules::contraction_index;
use dosp::{
    AlgoConfig, ExchangeModel, Objective, PowerControl, PowerLawSchedule, QuadraticToy, RunState, SineParams, Streams,
};

/// Criteria that fail with the current method; they are reported but do not
/// fail the run. An unexpected pass is reported too.
const KNOWN_FAILURES: [u32; 1] = [6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_summary(summary: &Summary, ids: &[&str]) -> Outcome {
    let picked: Vec<_> = summary
        .assertions
        .iter()
        .filter(|a| ids.is_empty() || ids.contains(&a.id.as_str()))
        .collect();
    assert!(!picked.is_empty(), "no assertions matched {ids:?}");
    let failed: Vec<String> = picked
        .iter()
        .filter(|a| !a.passed())
        .map(|a| format!("{} measured {:.6} vs {:.6}", a.id, a.measured, a.bound))
        .collect();
    let detail = if failed.is_empty() {
        let shown: Vec<String> = picked
            .iter()
            .take(4)
            .map(|a| format!("{} {:.4e} vs {:.4e}", a.id, a.measured, a.bound))
            .collect();
        let more = if picked.len() > 4 { format!(" (+{} more)", picked.len() - 4) } else { String::new() };
        format!("{} assertions; {}{more}", picked.len(), shown.join("; "))
    } else {
        failed.join("; ")
    };
    Outcome {
        pass: failed.is_empty(),
        detail,
    }
}

fn run_builtin(name: &str) -> Summary {
    run_experiment(&builtin(name).unwrap(), &RunOptions::default()).unwrap()
}

/// `(checked, outside)` counts of performed action vectors over 50 seeds.
fn feasibility<O: Objective>(objective: &O, config: &AlgoConfig) -> (u64, u64) {
    let b = config.bounds.clone().unwrap();
    let (mut checked, mut outside) = (0, 0);
    for seed in 0..50 {
        let mut streams = Streams::new(0xB0D, seed);
        let mut state = RunState::initial(config, objective, &mut streams).unwrap();
        let all: Vec<u64> = (state.k..state.k + 10_000).collect();
        run_from(config, objective, &mut state, 10_000, &mut streams, &all, |rec| {
            checked += 1;
            outside += u64::from(!b.contains(&rec.performed_action));
            Ok(())
        })
        .unwrap();
    }
    (checked, outside)
}

fn projection_safety() -> Outcome {
    let toy = QuadraticToy::default();
    let pf = PowerControl::proportional_fair(4).unwrap();
    let toy_schedule = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
    let pf_schedule = PowerLawSchedule::new(2.5, 0.75, 12.0, 0.25, 0).unwrap();
    let half = ExchangeModel::new(0.5).unwrap();
    let mut totals = Vec::new();
    for c in [AlgoConfig::dosp(toy_schedule), AlgoConfig::incomplete(toy_schedule, half)] {
        totals.push(feasibility(&toy, &c.with_bounds(toy.default_bounds())));
    }
    for c in [
        AlgoConfig::dosp(pf_schedule),
        AlgoConfig::incomplete(pf_schedule, half),
        AlgoConfig::sine(pf_schedule, SineParams::reference_four_node()),
    ] {
        totals.push(feasibility(&pf, &c.with_bounds(pf.default_bounds())));
    }
    let checked: u64 = totals.iter().map(|t| t.0).sum();
    let outside: u64 = totals.iter().map(|t| t.1).sum();
    Outcome {
        pass: outside == 0,
        detail: format!("{checked} performed actions over 5 configurations x 50 seeds x 10^4 steps, {outside} outside the box"),
    }
}

fn full_exchange_equivalence() -> Outcome {
    fn bits<O: Objective>(config: &AlgoConfig, o: &O, seed: u64) -> Vec<u64> {
        run(config, o, 1_000, &mut Streams::from_seed(seed), RecordSchedule::Every)
            .unwrap()
            .records
            .iter()
            .flat_map(|r| r.nominal_action.iter().chain(&r.performed_action).chain(&r.gradient_estimate))
            .map(|x| x.to_bits())
            .collect()
    }
    fn same<O: Objective>(o: &O, schedule: PowerLawSchedule, seed: u64) -> bool {
        let full = ExchangeModel::new(1.0).unwrap();
        let c = AlgoConfig::dosp(schedule).with_bounds(o.default_bounds());
        let i = AlgoConfig::incomplete(schedule, full).with_bounds(o.default_bounds());
        bits(&c, o, seed) == bits(&i, o, seed)
    }
    let toy_schedule = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
    let pf_schedule = PowerLawSchedule::shifted(2.0, 0.75, 12.0, 0.25).unwrap();
    let mut mismatches = Vec::new();
    for seed in 0..10 {
        if !same(&QuadraticToy::default(), toy_schedule, seed) {
            mismatches.push(format!("N=2 seed {seed}"));
        }
        for n in [4, 10] {
            if !same(&PowerControl::proportional_fair(n).unwrap(), pf_schedule, seed) {
                mismatches.push(format!("N={n} seed {seed}"));
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "N in {2, 4, 10}, 10 seeds each, 10^3 steps: identical bit patterns".into()
        } else {
            format!("differing trajectories: {}", mismatches.join(", "))
        },
    }
}

fn one_step_recursion() -> Outcome {
    let toy = QuadraticToy::default();
    let schedule = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
    let config = AlgoConfig::dosp(schedule).with_bounds(toy.default_bounds());
    let mc = MonteCarlo::new(2000, 11).with_record(RecordSchedule::Every);
    let a_star = toy.optimum().unwrap();
    let series = monte_carlo(&config, &toy, 10_001, Some(&a_star), &mc).unwrap();
    let m = MEstimate::from_series(&series.gradient_sq_norm.mean, DEFAULT_M_SAFETY).unwrap();
    let alpha1 = toy.hessian_bound().unwrap();
    let alpha5 = toy.strong_concavity().unwrap();
    let constants = RateConstants::complete(2, alpha1, 1.0, 1.0, alpha5, m).unwrap();
    let k0 = contraction_index(&schedule, constants.a, schedule.first_index()).unwrap();
    let d = series.divergence.as_ref().unwrap();
    let rows = lemma4_recursion_check(&series.ks, &d.mean, &d.stderr, &schedule, &constants, k0, 10_000, 4.0).unwrap();
    let failing: Vec<u64> = rows.iter().filter(|r| !r.holds).map(|r| r.k).collect();
    let tightest = rows
        .iter()
        .map(|r| (r.lhs - r.rhs) / r.combined_se)
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: failing.is_empty() && rows.len() as u64 == 10_000 - k0,
        detail: format!(
            "A = {}, B = {:.4}, C = M = {:.4}, K0 = {k0}: {} of {} rows hold; largest (lhs - rhs)/se = {tightest:.3}",
            constants.a,
            constants.b,
            constants.c,
            rows.len() - failing.len(),
            rows.len()
        ),
    }
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for name in list_experiments() {
        let mut spec = builtin(name).unwrap();
        let mut options = RunOptions::default();
        if spec.kind == ExperimentKind::Divergence {
            // Reduced budgets keep the rerun cheap; seeding does not depend on them.
            spec.optimum_horizon = 20_000;
            spec.optimum_replications = 4;
            options.replications = Some(16);
            options.horizon = Some(3_000);
        }
        let mut outputs = Vec::new();
        for (attempt, jobs) in [(0, None), (1, Some(1))] {
            let dir = tmp.path().join(format!("{name}_{attempt}"));
            let o = RunOptions {
                out_dir: Some(dir.clone()),
                jobs,
                ..options.clone()
            };
            run_experiment(&spec, &o).unwrap();
            outputs.push(read_dir(&dir));
        }
        files += outputs[0].len();
        if outputs[0] != outputs[1] {
            differing.push(name);
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("{files} files across {} built-ins byte-identical on rerun", list_experiments().len())
        } else {
            format!("outputs differ for {}", differing.join(", "))
        },
    }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |id: u32| only.as_ref().is_none_or(|o| o.contains(&id));

    let mut fig5_7: Option<Summary> = None;
    let mut fig5_7_summary = || fig5_7.get_or_insert_with(|| run_builtin("fig5_7")).clone();

    let criteria: Vec<(u32, &str)> = vec![
        (1, "toy envelope 2(k+1)^-0.5 for beta0 in {0.28, 0.5}; beta0 = 0.23 ratio above beta0 = 0.5"),
        (2, "toy envelope 2(k+1)^-0.3 for k >= 10^4, four exponent pairs"),
        (3, "partial-exchange expectation equals (1-(1-p)^(N-1)) sum u by enumeration"),
        (4, "estimator bias within the bias bound and within 4 SE of zero"),
        (5, "analytic power-control gradients match finite differences"),
        (6, "power control: perturbation ascent near plateau, reaches it before the sine baseline"),
        (7, "power control: mean D_k/N nondecreasing as p decreases"),
        (8, "constrained runs perform only feasible actions"),
        (9, "p = 1 exchange reproduces the complete iteration bit for bit"),
        (10, "scalar rate inequality g(x) < b on the grid and its limit"),
        (11, "one-step recursion of D_k holds within 4 SE"),
        (12, "built-in experiments are byte-identical on rerun"),
    ];

    let mut unexpected = 0;
    for (id, name) in criteria {
        if !wanted(id) {
            continue;
        }
        let outcome = match id {
            1 => from_summary(&run_builtin("fig3"), &[]),
            2 => from_summary(&run_builtin("fig4"), &[]),
            3 => from_summary(&run_builtin("lemma3_check"), &[]),
            4 => from_summary(&run_builtin("bias_check"), &[]),
            5 => from_summary(&run_builtin("gradient_check"), &[]),
            6 => from_summary(&fig5_7_summary(), &["dosp.near_plateau", "dosp.vs.sine.reaches_plateau"]),
            7 => from_summary(&fig5_7_summary(), &["divergence_monotone_in_p"]),
            8 => projection_safety(),
            9 => full_exchange_equivalence(),
            10 => from_summary(&run_builtin("lemma7_grid"), &[]),
            11 => one_step_recursion(),
            12 => determinism(),
            _ => unreachable!(),
        };
        let known = KNOWN_FAILURES.contains(&id);
        let status = match (outcome.pass, known) {
            (true, false) => "PASS",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
            (false, true) => "FAIL (known limitation)",
            (true, true) => "PASS (listed as a known failure)",
        };
        println!("criterion {id:>2} {status}: {name}\n             {}", outcome.detail);
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}

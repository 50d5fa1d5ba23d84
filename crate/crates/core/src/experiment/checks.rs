//! Fixed-point numerical checks: estimator bias, the partial-exchange
//! expectation, the scalar rate inequality, and gradient formulas.

use rand::Rng;
use rayon::prelude::*;

use super::runner::{Assertion, Outputs, Summary};
use super::spec::{ExperimentSpec, ObjectiveSpec};
use crate::analysis::{bias_bound_at, empirical_bias, finite_difference_gradient, lemma7_check, VectorEstimate};
use crate::error::Result;
use crate::exchange::{lemma3_enumeration_oracle, ExchangeModel};
use crate::objectives::{Objective, PowerControl, PowerUtility, QuadraticToy};
use crate::perturbation::PerturbationModel;
use crate::streams::Streams;

const Z: f64 = 4.0;

pub const BIAS_POINTS: [[f64; 2]; 3] = [[0.0, 0.0], [2.0, 1.0], [0.5, 2.5]];
pub const BIAS_GAMMAS: [f64; 3] = [1.0, 0.5, 0.1];
pub const LEMMA3_PS: [f64; 5] = [0.1, 0.25, 0.5, 0.9, 1.0];

fn toy_of(spec: &ExperimentSpec) -> QuadraticToy {
    match &spec.objective {
        ObjectiveSpec::Toy(t) => t.clone(),
        ObjectiveSpec::Power(_) => QuadraticToy::default(),
    }
}

fn max_z(e: &VectorEstimate) -> f64 {
    e.mean
        .iter()
        .zip(&e.stderr)
        .map(|(m, s)| if *s > 0.0 { m.abs() / s } else if *m == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

pub(crate) fn bias_check(spec: &ExperimentSpec, summary: &mut Summary, out: &mut Outputs) -> Result<()> {
    let toy = toy_of(spec);
    let perturbation = PerturbationModel::default();
    let moments = perturbation.moments();
    let alpha1 = toy.hessian_bound().expect("toy curvature is known");
    let exchange = ExchangeModel::new(0.5)?;

    let mut cases = Vec::new();
    for incomplete in [false, true] {
        for a in BIAS_POINTS {
            for gamma in BIAS_GAMMAS {
                cases.push((incomplete, a, gamma));
            }
        }
    }
    let estimates: Vec<Result<VectorEstimate>> = cases
        .par_iter()
        .enumerate()
        .map(|(j, (incomplete, a, gamma))| {
            let mut rng = Streams::new(spec.seed, j as u64).perturbation;
            let ex = incomplete.then_some(&exchange);
            empirical_bias(&toy, a, *gamma, &perturbation, ex, spec.samples, &mut rng)
        })
        .collect();

    let mut csv = String::from("variant,a_1,a_2,gamma,bias_1,bias_2,stderr_1,stderr_2,norm,bound\n");
    for ((incomplete, a, gamma), est) in cases.iter().zip(estimates) {
        let est = est?;
        let variant = if *incomplete { "incomplete_p0.5" } else { "complete" };
        let bound = bias_bound_at(*gamma, 2, alpha1, moments.alpha2, moments.alpha3)?;
        let id = format!("bias.{variant}.a=({},{}).gamma={gamma}", a[0], a[1]);
        if !incomplete {
            let limit = bound + Z * est.stderr_norm();
            summary.assertions.push(
                Assertion::new(format!("{id}.bound"), est.norm() <= limit, est.norm(), bound, Z * est.stderr_norm())
                    .with_detail("norm of the empirical bias against the first-order bias bound"),
            );
        }
        let z = max_z(&est);
        summary.assertions.push(
            Assertion::new(format!("{id}.zero"), z <= Z, z, Z, 0.0)
                .with_detail("largest |bias component| in standard errors; the bias of a quadratic is exactly zero"),
        );
        csv.push_str(&format!(
            "{variant},{},{},{gamma},{},{},{},{},{},{bound}\n",
            a[0],
            a[1],
            est.mean[0],
            est.mean[1],
            est.stderr[0],
            est.stderr[1],
            est.norm()
        ));
    }
    out.add("bias_check.csv", csv);
    summary.notes.push(format!(
        "{} samples per case; the incomplete estimate is normalized by q = 1 - (1 - p)^(N - 1)",
        spec.samples
    ));
    Ok(())
}

pub(crate) fn lemma3_check(spec: &ExperimentSpec, summary: &mut Summary, out: &mut Outputs) -> Result<()> {
    let mut csv = String::from("n,p,max_abs_error,q,max_abs_error_with_exponent_n\n");
    let mut worst_alt = 0.0f64;
    for n in 2..=6usize {
        for (pj, p) in LEMMA3_PS.iter().enumerate() {
            let mut rng = Streams::new(spec.seed, (n * 16 + pj) as u64).environment;
            let q = ExchangeModel::new(*p)?.q_nonempty(n)?;
            let (mut err, mut alt) = (0.0f64, 0.0f64);
            for _ in 0..spec.samples {
                let u: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
                let total: f64 = u.iter().sum();
                for i in 0..n {
                    let e = lemma3_enumeration_oracle(i, &u, *p)?;
                    err = err.max((e - q.q_derived * total).abs());
                    alt = alt.max((e - q.q_paper * total).abs());
                }
            }
            worst_alt = worst_alt.max(alt);
            summary.assertions.push(
                Assertion::new(format!("lemma3.n={n}.p={p}"), err <= 1e-12, err, 0.0, 1e-12)
                    .with_detail("max |E[estimate] - q sum u| over nodes and fuzzed utility vectors"),
            );
            csv.push_str(&format!("{n},{p},{err},{},{alt}\n", q.q_derived));
        }
    }
    out.add("lemma3_check.csv", csv);
    summary.notes.push(format!(
        "with the exponent N in place of N - 1 the expectation misses by up to {worst_alt}; the exact factor is 1 - (1 - p)^(N - 1)"
    ));
    Ok(())
}

pub(crate) fn lemma7_grid(summary: &mut Summary, out: &mut Outputs) -> Result<()> {
    let grid: Vec<f64> = (1..=20).map(|j| j as f64 / 20.0).collect();
    let mut csv = String::from("a,b,x,g,holds\n");
    let (mut failures, mut worst) = (0usize, f64::NEG_INFINITY);
    for a in &grid {
        for b in &grid {
            for x in &grid {
                let (g, holds) = lemma7_check(*a, *b, *x)?;
                failures += usize::from(!holds);
                worst = worst.max(g - b);
                csv.push_str(&format!("{a},{b},{x},{g},{holds}\n"));
            }
        }
    }
    summary.assertions.push(
        Assertion::new("lemma7.grid", failures == 0, worst, 0.0, 0.0)
            .with_detail(format!("max g(x) - b over the 20^3 grid; {failures} points fail")),
    );
    for b in [0.1, 0.5, 1.0] {
        let (g, _) = lemma7_check(1.0, b, 1e-8)?;
        let gap = (g - b).abs();
        summary.assertions.push(
            Assertion::new(format!("lemma7.limit.b={b}"), gap <= 1e-6, gap, 0.0, 1e-6)
                .with_detail("|g(1e-8) - b| at a = 1, where g tends to b"),
        );
    }
    out.add("lemma7_grid.csv", csv);
    Ok(())
}

/// Interior sampling ranges that keep central differences inside the domain.
fn interior(model: &PowerControl) -> (f64, f64) {
    match model.utility {
        PowerUtility::ProportionalFair => (0.01, model.a_max),
        PowerUtility::SumRate => (-5.0, model.a_max.ln()),
    }
}

/// `max_i |fd_i - g_i| / max_i |g_i|` at `points` random states and actions.
pub fn gradient_relative_error(model: &PowerControl, points: usize, seed: u64) -> Result<f64> {
    let mut streams = Streams::from_seed(seed);
    let (lo, hi) = interior(model);
    let n = model.n_nodes();
    let mut g = vec![0.0; n];
    let mut worst = 0.0f64;
    for _ in 0..points {
        let a: Vec<f64> = (0..n).map(|_| streams.init.random_range(lo..hi)).collect();
        let s = model.sample_state(&mut streams.environment);
        model.exact_sample_gradient(&a, &s, &mut g)?;
        let fd = finite_difference_gradient(model, &a, &s, 1e-5)?;
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let diff = fd.iter().zip(&g).fold(0.0f64, |m, (f, e)| m.max((f - e).abs()));
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Ok(worst)
}

pub(crate) fn gradient_check(spec: &ExperimentSpec, summary: &mut Summary, out: &mut Outputs) -> Result<()> {
    let mut csv = String::from("utility,n,points,max_relative_error\n");
    for (name, utility) in [
        ("proportional_fair", PowerUtility::ProportionalFair),
        ("sum_rate", PowerUtility::SumRate),
    ] {
        for n in [2usize, 4] {
            let model = PowerControl::new(utility, n)?;
            let err = gradient_relative_error(&model, spec.samples, spec.seed.wrapping_add(n as u64))?;
            summary.assertions.push(
                Assertion::new(format!("gradient.{name}.n={n}"), err <= 1e-5, err, 0.0, 1e-5)
                    .with_detail("central differences with step 1e-5 against the analytic per-sample gradient"),
            );
            csv.push_str(&format!("{name},{n},{},{err}\n", spec.samples));
        }
    }
    out.add("gradient_check.csv", csv);
    Ok(())
}

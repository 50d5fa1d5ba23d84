//! Executes an [`ExperimentSpec`]: replicated runs, envelopes, assertion
//! outcomes, CSV series and a JSON summary.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checks;
use super::spec::{Check, ExperimentKind, ExperimentSpec, ObjectiveSpec, RunSpec};
use crate::algorithm::Variant;
use crate::analysis::{
    fit_omega, monte_carlo, plateau_optimum, theorem4_envelopes, theorem5_envelope, Branch, McSeries, MEstimate,
    MonteCarlo, PlateauSearch, RateConstants, Theorem4Envelopes, DEFAULT_M_SAFETY,
};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::schedules::{rate_diagnostics, theorem5_condition, A4Report, Theorem5Condition};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; all available cores when `None`.
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub horizon: Option<u64>,
    pub allow_invalid_schedule: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One asserted quantity; `hard` assertions decide the exit status under `--check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub hard: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(id: impl Into<String>, pass: bool, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured,
            bound,
            tolerance,
            hard: true,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Envelope constants of one run, when the objective provides curvature bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub constants: RateConstants,
    pub k0: u64,
    pub d_k0: f64,
    pub theta: Branch,
    pub rho: Branch,
    pub fast_rate_condition: Theorem5Condition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub variant: String,
    pub replications: usize,
    pub horizon: u64,
    pub schedule_check: A4Report,
    pub schedule_check_waived: bool,
    pub final_k: u64,
    pub final_divergence: f64,
    pub final_divergence_stderr: f64,
    pub final_utility_per_node: f64,
    pub final_utility_stderr: f64,
    /// `1.5 max_k E||g_k||^2` over the recorded iterations.
    pub m: MEstimate,
    pub envelope_omega: f64,
    pub envelope_omega_fitted: bool,
    pub envelopes: Option<EnvelopeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub kind: ExperimentKind,
    pub objective: String,
    pub n_nodes: usize,
    pub seed: u64,
    pub optimum: Option<Vec<f64>>,
    pub optimum_source: Option<String>,
    pub runs: Vec<RunSummary>,
    pub assertions: Vec<Assertion>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl Summary {
    /// All hard assertions passed.
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed() || !a.hard)
    }
}

/// Collected output of one run before it is written.
pub(crate) struct RunOutput {
    pub spec: RunSpec,
    pub series: McSeries,
    pub envelopes: Option<Theorem4Envelopes>,
    pub summary: RunSummary,
}

/// Files are accumulated in memory and written together at the end.
#[derive(Default)]
pub(crate) struct Outputs {
    pub files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error, p: &Path| Error::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        };
        fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| io(e, &path))?;
        }
        Ok(())
    }
}

/// Shortest round-trip formatting; empty for missing values.
pub(crate) fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<Summary> {
    let mut spec = spec.clone();
    if let Some(seed) = options.seed {
        spec.seed = seed;
    }
    for run in &mut spec.runs {
        if let Some(r) = options.replications {
            run.replications = r;
        }
        if let Some(h) = options.horizon {
            run.horizon = h;
        }
    }
    let report = spec.validate(options.allow_invalid_schedule)?;

    let mut outputs = Outputs::default();
    let mut summary = Summary {
        name: spec.name.clone(),
        kind: spec.kind,
        objective: spec.objective.kind_name().to_string(),
        n_nodes: spec.objective.n_nodes(),
        seed: spec.seed,
        optimum: None,
        optimum_source: None,
        runs: Vec::new(),
        assertions: Vec::new(),
        files: Vec::new(),
        notes: spec.notes.clone(),
    };

    match spec.kind {
        ExperimentKind::Divergence => {
            let runs = match &spec.objective {
                ObjectiveSpec::Toy(t) => divergence_runs(&spec, t, options, &mut summary)?,
                ObjectiveSpec::Power(p) => divergence_runs(&spec, p, options, &mut summary)?,
            };
            for (run, validation) in runs.iter().zip(&report.runs) {
                debug_assert_eq!(run.spec.label, validation.label);
                outputs.add(format!("{}.csv", run.spec.label), divergence_csv(run));
                outputs.add(format!("{}_utility.csv", run.spec.label), utility_csv(&run.series));
            }
            for (j, check) in spec.checks.iter().enumerate() {
                let mut a = evaluate(check, &runs, spec.objective.n_nodes())?;
                a.hard = !spec.soft_checks.contains(&j);
                summary.assertions.push(a);
            }
            summary.runs = runs.into_iter().map(|r| r.summary).collect();
            if summary.runs.iter().any(|r| r.envelopes.is_some()) {
                summary.notes.push(
                    "envelope constants use an empirical second-moment bound, so the theta/rho envelopes are statistical rather than exact bounds"
                        .into(),
                );
            }
        }
        ExperimentKind::BiasCheck => checks::bias_check(&spec, &mut summary, &mut outputs)?,
        ExperimentKind::Lemma3Check => checks::lemma3_check(&spec, &mut summary, &mut outputs)?,
        ExperimentKind::Lemma7Grid => checks::lemma7_grid(&mut summary, &mut outputs)?,
        ExperimentKind::GradientCheck => checks::gradient_check(&spec, &mut summary, &mut outputs)?,
    }

    summary.files = outputs.files.iter().map(|(n, _)| n.clone()).collect();
    summary.files.push("summary.json".into());
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io {
        path: "summary.json".into(),
        reason: e.to_string(),
    })?;
    outputs.add("summary.json", json + "\n");
    if let Some(dir) = &options.out_dir {
        outputs.write(dir)?;
    }
    Ok(summary)
}

fn optimum_for<O: Objective + Debug>(
    spec: &ExperimentSpec,
    objective: &O,
    summary: &mut Summary,
) -> Result<Vec<f64>> {
    if let Some(a) = objective.optimum() {
        summary.optimum_source = Some("closed form".into());
        return Ok(a);
    }
    let reference = spec
        .runs
        .iter()
        .find(|r| r.algo.variant == Variant::ExactGradientBaseline)
        .unwrap_or(&spec.runs[0]);
    let search = PlateauSearch::new(reference.algo.schedule, objective.default_bounds())
        .with_budget(spec.optimum_horizon, spec.optimum_replications)
        .with_seed(spec.seed);
    summary.optimum_source = Some(format!(
        "plateau of exact-gradient ascent: {} iterations, {} replications, seed {}, tail from {}",
        search.horizon, search.replications, search.seed, search.tail_start
    ));
    plateau_optimum(objective, &search)
}

fn divergence_runs<O: Objective + Debug + Sync>(
    spec: &ExperimentSpec,
    objective: &O,
    options: &RunOptions,
    summary: &mut Summary,
) -> Result<Vec<RunOutput>> {
    let a_star = optimum_for(spec, objective, summary)?;
    summary.optimum = Some(a_star.clone());
    let n = objective.n_nodes();
    let mut out = Vec::with_capacity(spec.runs.len());
    for run in &spec.runs {
        let mc = MonteCarlo::new(run.replications, spec.seed)
            .with_jobs(options.jobs)
            .with_record(spec.record);
        let series = monte_carlo(&run.algo, objective, run.horizon, Some(&a_star), &mc)?;
        let d = series.divergence.as_ref().expect("optimum supplied");
        let last = series.ks.len() - 1;
        let m = MEstimate::from_series(&series.gradient_sq_norm.mean, DEFAULT_M_SAFETY)?;

        let (omega, fitted) = match spec.envelope_omega {
            Some(w) => (w, false),
            None => {
                let exponent = run.algo.schedule.rate_exponent();
                let w = fit_omega(&series.ks, &d.mean, exponent, series.ks[0], series.ks[last]).unwrap_or(0.0);
                (w, true)
            }
        };

        let envelopes = match (objective.hessian_bound(), objective.strong_concavity()) {
            (Some(alpha1), Some(alpha5)) if matches!(run.algo.variant, Variant::Dosp | Variant::DospIncomplete) => {
                let moments = run.algo.perturbation.moments();
                let constants = match &run.algo.exchange {
                    Some(e) => {
                        let q = e.q_nonempty(n)?.q_derived;
                        RateConstants::incomplete(n, alpha1, moments.alpha2, moments.alpha3, alpha5, q, m)?
                    }
                    None => RateConstants::complete(n, alpha1, moments.alpha2, moments.alpha3, alpha5, m)?,
                };
                let schedule = &run.algo.schedule;
                let diag = rate_diagnostics(schedule, constants.a, schedule.first_index(), run.horizon)?;
                // D at the first recorded iteration at or after K0.
                let j0 = series.ks.iter().position(|k| *k >= diag.k0).unwrap_or(last);
                let env = theorem4_envelopes(&diag, &constants, d.mean[j0], schedule)?;
                Some((env, d.mean[j0], theorem5_condition(schedule, constants.a)?))
            }
            _ => None,
        };

        let summary = RunSummary {
            label: run.label.clone(),
            variant: run.algo.variant.name().to_string(),
            replications: run.replications,
            horizon: run.horizon,
            schedule_check: run.algo.schedule.validate_a4(),
            schedule_check_waived: options.allow_invalid_schedule || run.allow_invalid_schedule,
            final_k: series.ks[last],
            final_divergence: d.mean[last],
            final_divergence_stderr: d.stderr[last],
            final_utility_per_node: series.utility_per_node.mean[last],
            final_utility_stderr: series.utility_per_node.stderr[last],
            m,
            envelope_omega: omega,
            envelope_omega_fitted: fitted,
            envelopes: envelopes.as_ref().map(|(env, d_k0, cond)| EnvelopeSummary {
                constants: env.constants,
                k0: env.k0,
                d_k0: *d_k0,
                theta: env.theta.clone(),
                rho: env.rho.clone(),
                fast_rate_condition: *cond,
            }),
        };
        out.push(RunOutput {
            spec: run.clone(),
            series,
            envelopes: envelopes.map(|(env, _, _)| env),
            summary,
        });
    }
    Ok(out)
}

fn divergence_csv(run: &RunOutput) -> String {
    let mut s = String::from("k,D_k,stderr,envelope_theta,envelope_rho,envelope_theorem5,lemma5_floor\n");
    let d = run.series.divergence.as_ref().expect("optimum supplied");
    let schedule = &run.spec.algo.schedule;
    for (j, k) in run.series.ks.iter().enumerate() {
        let point = run.envelopes.as_ref().and_then(|e| e.at(*k).ok());
        let t5 = theorem5_envelope(schedule, run.summary.envelope_omega, *k);
        s.push_str(&format!(
            "{k},{},{},{},{},{},{}\n",
            d.mean[j],
            d.stderr[j],
            cell(point.and_then(|p| p.theta)),
            cell(point.and_then(|p| p.rho)),
            t5,
            cell(point.map(|p| p.lemma5_floor)),
        ));
    }
    s
}

fn utility_csv(series: &McSeries) -> String {
    let n = series.mean_action.first().map_or(0, Vec::len);
    let mut s = String::from("k,f_per_node,stderr");
    for i in 1..=n {
        s.push_str(&format!(",a_{i}"));
    }
    s.push('\n');
    for (j, k) in series.ks.iter().enumerate() {
        s.push_str(&format!(
            "{k},{},{}",
            series.utility_per_node.mean[j], series.utility_per_node.stderr[j]
        ));
        for a in &series.mean_action[j] {
            s.push_str(&format!(",{a}"));
        }
        s.push('\n');
    }
    s
}

fn find<'a>(runs: &'a [RunOutput], label: &str) -> Result<&'a RunOutput> {
    runs.iter()
        .find(|r| r.spec.label == label)
        .ok_or_else(|| Error::Config {
            key: "checks".into(),
            reason: format!("no run labelled `{label}`"),
        })
}

/// Mean `f/N` over the recorded iterations of the last decade of the run.
pub fn plateau(series: &McSeries) -> f64 {
    let last = *series.ks.last().expect("nonempty series");
    let tail: Vec<f64> = series
        .ks
        .iter()
        .zip(&series.utility_per_node.mean)
        .filter(|(k, _)| **k >= last / 10)
        .map(|(_, f)| *f)
        .collect();
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// First recorded `k` with `|f/N - target| <= band * |target|`.
pub fn first_within(series: &McSeries, target: f64, band: f64) -> Option<u64> {
    series
        .ks
        .iter()
        .zip(&series.utility_per_node.mean)
        .find(|(_, f)| (*f - target).abs() <= band * target.abs())
        .map(|(k, _)| *k)
}

fn evaluate(check: &Check, runs: &[RunOutput], n: usize) -> Result<Assertion> {
    Ok(match check {
        Check::EnvelopeBound {
            label,
            omega,
            exponent,
            from,
            to,
        } => {
            let run = find(runs, label)?;
            let d = run.series.divergence_series().expect("optimum supplied");
            let mut worst = f64::NEG_INFINITY;
            let mut at = 0;
            for (k, v) in d.ks.iter().zip(&d.values) {
                if (*from..=*to).contains(k) {
                    let ratio = v / (omega * (*k as f64 + 1.0).powf(-exponent));
                    if ratio > worst {
                        worst = ratio;
                        at = *k;
                    }
                }
            }
            if worst == f64::NEG_INFINITY {
                return Ok(Assertion::new(format!("{label}.envelope"), false, 0.0, 1.0, 0.0)
                    .with_detail(format!("no recorded iterations at or after k = {from} in the window")));
            }
            Assertion::new(format!("{label}.envelope"), worst <= 1.0, worst, 1.0, 0.0).with_detail(format!(
                "max over recorded k in [{from}, {}] of D_k / ({omega} (k+1)^-{exponent}), attained at k = {at}",
                to.min(&d.ks[d.ks.len() - 1])
            ))
        }
        Check::RatioOrdering {
            worse,
            better,
            omega,
            exponent,
            from,
            to,
        } => {
            let reference = |k: u64| omega * (k as f64 + 1.0).powf(-exponent);
            let ratio = |label: &str| -> Result<f64> {
                let d = find(runs, label)?.series.divergence_series().expect("optimum supplied");
                Ok(d.window_mean_ratio(*from, *to, reference).unwrap_or(f64::NAN))
            };
            let (w, b) = (ratio(worse)?, ratio(better)?);
            Assertion::new(format!("{worse}.vs.{better}.ratio_ordering"), w > b, w, b, 0.0).with_detail(format!(
                "window mean of D_k / ({omega} (k+1)^-{exponent}) over [{from}, {to}]: {worse} must exceed {better}"
            ))
        }
        Check::NearPlateau {
            label,
            reference,
            tolerance,
        } => {
            let target = plateau(&find(runs, reference)?.series);
            let run = find(runs, label)?;
            let f = run.summary.final_utility_per_node;
            let gap = (f - target).abs() / target.abs();
            Assertion::new(format!("{label}.near_plateau"), gap <= *tolerance, gap, *tolerance, 0.0).with_detail(
                format!("final f/N = {f} against the last-decade mean f/N = {target} of `{reference}` (relative gap)"),
            )
        }
        Check::ReachesPlateauFirst {
            faster,
            slower,
            reference,
            band,
        } => {
            let target = plateau(&find(runs, reference)?.series);
            let hit = |label: &str| -> Result<f64> {
                Ok(first_within(&find(runs, label)?.series, target, *band).map_or(f64::INFINITY, |k| k as f64))
            };
            let (f, s) = (hit(faster)?, hit(slower)?);
            Assertion::new(format!("{faster}.vs.{slower}.reaches_plateau"), f < s, f, s, *band).with_detail(format!(
                "first recorded k with f/N within {band} (relative) of {target}; {faster} must be strictly earlier"
            ))
        }
        Check::MonotoneDivergence { labels, from, to } => {
            let mut means = Vec::with_capacity(labels.len());
            for label in labels {
                let d = find(runs, label)?.series.divergence_series().expect("optimum supplied");
                means.push(d.window_mean_ratio(*from, *to, |_| n as f64).unwrap_or(f64::NAN));
            }
            let min_step = means.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            Assertion::new("divergence_monotone_in_p", min_step >= 0.0, min_step, 0.0, 0.0).with_detail(format!(
                "window means of D_k / N over [{from}, {to}] for {}: {:?}",
                labels.join(", "),
                means
            ))
        }
    })
}

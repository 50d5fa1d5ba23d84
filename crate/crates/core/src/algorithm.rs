//! Iteration rules: stochastic-perturbation ascent with complete or partial
//! utility exchange, its projected form, and two reference baselines.
//!
//! One iteration `k` of the perturbation methods:
//!
//! 1. every node draws `phi_i` and performs `a_i + gamma_k phi_i`;
//! 2. the environment draws `S_k`, every node measures its noisy utility;
//! 3. node `i` forms a scalar estimate of the global utility (the exact sum,
//!    or the partial-exchange extrapolation) and moves by `beta_k phi_i` times
//!    that estimate, reusing the `phi_i` it performed with;
//! 4. under box constraints the new action is clamped to a box shrunk by
//!    `alpha3 gamma_{k+1}` so that the next performed action stays feasible.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exchange::{incomplete_estimate, ExchangeModel};
use crate::objectives::{observe_all, ActionVector, Bounds, Objective};
use crate::perturbation::PerturbationModel;
use crate::schedules::PowerLawSchedule;
use crate::streams::Streams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Dosp,
    DospIncomplete,
    SineBaseline,
    ExactGradientBaseline,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Dosp => "dosp",
            Variant::DospIncomplete => "dosp_incomplete",
            Variant::SineBaseline => "sine_baseline",
            Variant::ExactGradientBaseline => "exact_gradient_baseline",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dosp" => Some(Variant::Dosp),
            "dosp_incomplete" => Some(Variant::DospIncomplete),
            "sine_baseline" | "sine" => Some(Variant::SineBaseline),
            "exact_gradient_baseline" | "exact_gradient" => Some(Variant::ExactGradientBaseline),
            _ => None,
        }
    }
}

/// Deterministic perturbation `lambda_i sin(omega_i t_k + phase_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineParams {
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
}

impl SineParams {
    /// Frequencies must be pairwise distinct and no sum of two (possibly equal)
    /// frequencies may equal a third.
    pub fn new(amplitudes: Vec<f64>, frequencies: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        let n = frequencies.len();
        if amplitudes.len() != n || phases.len() != n {
            return Err(invalid(
                "sine",
                "amplitudes, frequencies and phases must have equal length",
            ));
        }
        if amplitudes.iter().chain(&frequencies).chain(&phases).any(|x| !x.is_finite()) {
            return Err(invalid("sine", "parameters must be finite"));
        }
        let same = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if same(frequencies[i], frequencies[j]) {
                    return Err(invalid(
                        "sine.omegas",
                        format!("frequencies {i} and {j} coincide"),
                    ));
                }
            }
            for j in i..n {
                for l in 0..n {
                    if same(frequencies[i] + frequencies[j], frequencies[l]) {
                        return Err(invalid(
                            "sine.omegas",
                            format!("frequencies {i} + {j} equal frequency {l}"),
                        ));
                    }
                }
            }
        }
        Ok(Self {
            amplitudes,
            frequencies,
            phases,
        })
    }

    /// `omega = (63, 70, 56, 49)`, `lambda = 1.5`, zero phase.
    pub fn reference_four_node() -> Self {
        Self::new(vec![1.5; 4], vec![63.0, 70.0, 56.0, 49.0], vec![0.0; 4])
            .expect("reference parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn alpha3(&self) -> f64 {
        self.amplitudes.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn fill(&self, t: f64, out: &mut [f64]) {
        for (i, phi) in out.iter_mut().enumerate() {
            *phi = self.amplitudes[i] * (self.frequencies[i] * t + self.phases[i]).sin();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub schedule: PowerLawSchedule,
    pub perturbation: PerturbationModel,
    pub bounds: Option<Bounds>,
    pub exchange: Option<ExchangeModel>,
    pub variant: Variant,
    pub sine: Option<SineParams>,
}

impl AlgoConfig {
    pub fn new(
        variant: Variant,
        schedule: PowerLawSchedule,
        perturbation: PerturbationModel,
        bounds: Option<Bounds>,
        exchange: Option<ExchangeModel>,
        sine: Option<SineParams>,
    ) -> Result<Self> {
        if sine.is_some() != (variant == Variant::SineBaseline) {
            return Err(invalid(
                "sine",
                "sine parameters are required by, and only by, the sine baseline",
            ));
        }
        if variant == Variant::DospIncomplete && exchange.is_none() {
            return Err(invalid("exchange.p", "the incomplete variant needs an exchange model"));
        }
        Ok(Self {
            schedule,
            perturbation,
            bounds,
            exchange,
            variant,
            sine,
        })
    }

    pub fn dosp(schedule: PowerLawSchedule) -> Self {
        Self::new(
            Variant::Dosp,
            schedule,
            PerturbationModel::default(),
            None,
            None,
            None,
        )
        .expect("valid")
    }

    pub fn incomplete(schedule: PowerLawSchedule, exchange: ExchangeModel) -> Self {
        Self::new(
            Variant::DospIncomplete,
            schedule,
            PerturbationModel::default(),
            None,
            Some(exchange),
            None,
        )
        .expect("valid")
    }

    pub fn sine(schedule: PowerLawSchedule, sine: SineParams) -> Self {
        Self::new(
            Variant::SineBaseline,
            schedule,
            PerturbationModel::default(),
            None,
            None,
            Some(sine),
        )
        .expect("valid")
    }

    pub fn exact_gradient(schedule: PowerLawSchedule) -> Self {
        Self::new(
            Variant::ExactGradientBaseline,
            schedule,
            PerturbationModel::default(),
            None,
            None,
            None,
        )
        .expect("valid")
    }

    pub fn with_bounds(mut self, bounds: Option<Bounds>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_perturbation(mut self, perturbation: PerturbationModel) -> Self {
        self.perturbation = perturbation;
        self
    }

    /// Dimension checks against a concrete objective.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if let Some(b) = &self.bounds {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: b.len(),
                });
            }
        }
        if let Some(s) = &self.sine {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: s.len(),
                });
            }
        }
        if self.variant == Variant::DospIncomplete && n < 2 {
            return Err(invalid("objective.n_nodes", "partial exchange needs two or more nodes"));
        }
        Ok(())
    }

    /// Bound on `|phi|` for the perturbation actually used by the variant.
    pub fn alpha3(&self) -> f64 {
        match (&self.variant, &self.sine) {
            (Variant::SineBaseline, Some(s)) => s.alpha3(),
            (Variant::ExactGradientBaseline, _) => 0.0,
            _ => self.perturbation.moments().alpha3,
        }
    }

    /// `gamma_k`, capped under bounds at `min half-width / alpha3` so the shrunk
    /// box never inverts while `gamma_k` is still large.
    pub fn perturbation_scale(&self, k: u64) -> Result<f64> {
        let gamma = self.schedule.gamma(k)?;
        match &self.bounds {
            Some(b) if self.alpha3() > 0.0 => Ok(gamma.min(b.min_half_width() / self.alpha3())),
            _ => Ok(gamma),
        }
    }
}

/// State carried between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub k: u64,
    /// Nominal action `a_k`.
    pub a: ActionVector,
    /// `t_k = sum_{k'=1}^{k} beta_{k'}`, used by the sine baseline.
    pub t: f64,
    /// Perturbation performed at the last iteration.
    pub last_phi: Vec<f64>,
}

impl RunState {
    /// State at the schedule's first index with the given nominal action.
    pub fn new(config: &AlgoConfig, a: ActionVector) -> Result<Self> {
        let k = config.schedule.first_index();
        let t = if k >= 1 { config.schedule.beta(1)? } else { 0.0 };
        let n = a.len();
        Ok(Self {
            k,
            a,
            t,
            last_phi: vec![0.0; n],
        })
    }

    /// Draws `a_0` from the objective's initialization policy and, under bounds,
    /// places it in the shrunk box for the first iteration.
    pub fn initial<O: Objective>(config: &AlgoConfig, objective: &O, streams: &mut Streams) -> Result<Self> {
        let a0 = objective.initial_action(&mut streams.init);
        let mut state = Self::new(config, a0)?;
        if let Some(bounds) = &config.bounds {
            let margin = config.alpha3() * config.perturbation_scale(state.k)?;
            state.a = clamp_into(&state.a, bounds, margin, state.k)?;
        }
        Ok(state)
    }
}

/// What the nodes used as their global-utility information.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// Complete exchange: every node holds the same `sum_i u_i`.
    Global(f64),
    /// Partial exchange: node `i`'s own extrapolated estimate.
    PerNode(Vec<f64>),
    /// Gradient baseline, no utility exchange.
    Gradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: u64,
    /// Perturbation scale used at this iteration.
    pub gamma: f64,
    pub nominal_action: ActionVector,
    /// `nominal_action + gamma * phi`.
    pub performed_action: ActionVector,
    pub phi: Vec<f64>,
    pub observation: Observation,
    /// Update direction: `phi_i` times node `i`'s utility estimate, or the exact gradient.
    pub gradient_estimate: Vec<f64>,
    /// Noiseless `f(a_k, S_k)` at the nominal action.
    pub nominal_utility: f64,
}

impl IterationRecord {
    fn empty(n: usize) -> Self {
        Self {
            k: 0,
            gamma: 0.0,
            nominal_action: vec![0.0; n],
            performed_action: vec![0.0; n],
            phi: vec![0.0; n],
            observation: Observation::Gradient,
            gradient_estimate: vec![0.0; n],
            nominal_utility: 0.0,
        }
    }
}

fn clamp_into(candidate: &[f64], bounds: &Bounds, margin: f64, k: u64) -> Result<Vec<f64>> {
    if candidate.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            actual: candidate.len(),
        });
    }
    candidate
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (lo, hi) = (bounds.min[i] + margin, bounds.max[i] - margin);
            if lo > hi {
                Err(Error::InfeasibleProjection {
                    k,
                    node: i,
                    lower: lo,
                    upper: hi,
                })
            } else {
                Ok(x.clamp(lo, hi))
            }
        })
        .collect()
}

/// Clamp to `[min + alpha3 gamma_{k_next}, max - alpha3 gamma_{k_next}]`.
pub fn project(candidate: &[f64], k_next: u64, config: &AlgoConfig) -> Result<ActionVector> {
    let bounds = config
        .bounds
        .as_ref()
        .ok_or_else(|| Error::Precondition("projection needs bounds".into()))?;
    let margin = config.alpha3() * config.schedule.gamma(k_next)?;
    clamp_into(candidate, bounds, margin, k_next)
}

/// Reusable per-run buffers.
struct Scratch<S> {
    performed: Vec<f64>,
    utilities: Vec<f64>,
    subsets: Vec<Vec<usize>>,
    state: Option<S>,
}

/// Advances one run, reusing its buffers across iterations.
pub struct Stepper<'a, O: Objective> {
    config: &'a AlgoConfig,
    objective: &'a O,
    scratch: Scratch<O::State>,
    record: IterationRecord,
    nominal: bool,
}

impl<'a, O: Objective> Stepper<'a, O> {
    pub fn new(config: &'a AlgoConfig, objective: &'a O) -> Result<Self> {
        let n = objective.n_nodes();
        config.validate_for(n)?;
        Ok(Self {
            config,
            objective,
            scratch: Scratch {
                performed: vec![0.0; n],
                utilities: vec![0.0; n],
                subsets: vec![Vec::new(); n],
                state: None,
            },
            record: IterationRecord::empty(n),
            nominal: true,
        })
    }

    /// Whether records carry `f(a_k, S_k)`; when off the field is NaN and
    /// the extra utility evaluation is skipped.
    pub fn set_nominal_utility(&mut self, on: bool) {
        self.nominal = on;
    }

    /// The record of the most recent iteration.
    pub fn record(&self) -> &IterationRecord {
        &self.record
    }

    pub fn step(&mut self, state: &mut RunState, streams: &mut Streams) -> Result<&IterationRecord> {
        if state.a.len() != self.objective.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.objective.n_nodes(),
                actual: state.a.len(),
            });
        }
        match self.config.variant {
            Variant::Dosp | Variant::DospIncomplete | Variant::SineBaseline => {
                self.perturbation_step(state, streams)?
            }
            Variant::ExactGradientBaseline => self.gradient_step(state, streams)?,
        }
        Ok(&self.record)
    }

    fn perturbation_step(&mut self, state: &mut RunState, streams: &mut Streams) -> Result<()> {
        let config = self.config;
        let k = state.k;
        let beta = config.schedule.beta(k)?;
        let gamma = config.perturbation_scale(k)?;
        let rec = &mut self.record;
        let sc = &mut self.scratch;

        match (&config.variant, &config.sine) {
            (Variant::SineBaseline, Some(sine)) => sine.fill(state.t, &mut rec.phi),
            _ => config.perturbation.fill(&mut rec.phi, &mut streams.perturbation),
        }
        let s = self.objective.sample_state(&mut streams.environment);
        for i in 0..state.a.len() {
            sc.performed[i] = state.a[i] + gamma * rec.phi[i];
        }
        if let Some(b) = &config.bounds {
            // The shrunk box keeps this inside up to rounding; absorb the last ulp.
            for (i, x) in sc.performed.iter_mut().enumerate() {
                *x = x.clamp(b.min[i], b.max[i]);
            }
        }
        observe_all(self.objective, &sc.performed, &s, &mut streams.noise, &mut sc.utilities)?;

        let mut partial = false;
        match config.variant {
            Variant::DospIncomplete => {
                let exchange = config
                    .exchange
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("incomplete variant without exchange".into()))?;
                exchange.sample_subsets_into(&mut streams.exchange, &mut sc.subsets);
                let mut estimates = match std::mem::replace(&mut rec.observation, Observation::Gradient) {
                    Observation::PerNode(v) => v,
                    _ => Vec::with_capacity(sc.utilities.len()),
                };
                estimates.clear();
                for (i, subset) in sc.subsets.iter().enumerate() {
                    let f_i = incomplete_estimate(i, &sc.utilities, subset)?;
                    rec.gradient_estimate[i] = rec.phi[i] * f_i;
                    estimates.push(f_i);
                }
                rec.observation = Observation::PerNode(estimates);
                partial = true;
            }
            _ => {
                let f: f64 = sc.utilities.iter().sum();
                for (g, phi) in rec.gradient_estimate.iter_mut().zip(&rec.phi) {
                    *g = phi * f;
                }
                rec.observation = Observation::Global(f);
            }
        }

        rec.k = k;
        rec.gamma = gamma;
        rec.nominal_action.copy_from_slice(&state.a);
        rec.performed_action.copy_from_slice(&sc.performed);
        rec.nominal_utility = if self.nominal {
            self.objective.global_utility(&state.a, &s)?
        } else {
            f64::NAN
        };

        let mut next: Vec<f64> = state
            .a
            .iter()
            .zip(&rec.gradient_estimate)
            .map(|(a, g)| a + beta * g)
            .collect();
        if let Some(bounds) = &config.bounds {
            let margin = config.alpha3() * config.perturbation_scale(k + 1)?;
            next = clamp_into(&next, bounds, margin, k + 1)?;
            if partial {
                // Nodes that heard nobody hold their action.
                for (i, subset) in sc.subsets.iter().enumerate() {
                    if subset.is_empty() {
                        next[i] = state.a[i];
                    }
                }
            }
        }
        state.a = next;
        state.last_phi.copy_from_slice(&rec.phi);
        state.k = k + 1;
        state.t += config.schedule.beta(k + 1)?;
        sc.state = Some(s);
        Ok(())
    }

    fn gradient_step(&mut self, state: &mut RunState, streams: &mut Streams) -> Result<()> {
        let config = self.config;
        let k = state.k;
        let beta = config.schedule.beta(k)?;
        let rec = &mut self.record;
        let s = self.objective.sample_state(&mut streams.environment);
        self.objective
            .exact_sample_gradient(&state.a, &s, &mut rec.gradient_estimate)?;

        rec.k = k;
        rec.gamma = 0.0;
        rec.phi.iter_mut().for_each(|x| *x = 0.0);
        rec.nominal_action.copy_from_slice(&state.a);
        rec.performed_action.copy_from_slice(&state.a);
        rec.observation = Observation::Gradient;
        rec.nominal_utility = if self.nominal {
            self.objective.global_utility(&state.a, &s)?
        } else {
            f64::NAN
        };

        let next: Vec<f64> = state
            .a
            .iter()
            .zip(&rec.gradient_estimate)
            .map(|(a, g)| a + beta * g)
            .collect();
        state.a = match &config.bounds {
            Some(bounds) => clamp_into(&next, bounds, 0.0, k + 1)?,
            None => next,
        };
        state.last_phi.iter_mut().for_each(|x| *x = 0.0);
        state.k = k + 1;
        state.t += config.schedule.beta(k + 1)?;
        self.scratch.state = Some(s);
        Ok(())
    }
}

fn single_step<O: Objective>(
    expected: Variant,
    state: &mut RunState,
    config: &AlgoConfig,
    objective: &O,
    streams: &mut Streams,
) -> Result<IterationRecord> {
    if config.variant != expected {
        return Err(Error::Precondition(format!(
            "configuration is for {}, not {}",
            config.variant.name(),
            expected.name()
        )));
    }
    let mut stepper = Stepper::new(config, objective)?;
    Ok(stepper.step(state, streams)?.clone())
}

/// Complete-information step: every node uses `sum_i u_i(a + gamma phi, S)`.
pub fn step_dosp<O: Objective>(
    state: &mut RunState,
    config: &AlgoConfig,
    objective: &O,
    streams: &mut Streams,
) -> Result<IterationRecord> {
    single_step(Variant::Dosp, state, config, objective, streams)
}

/// Partial-exchange step: node `i` uses its own extrapolated estimate.
pub fn step_dosp_incomplete<O: Objective>(
    state: &mut RunState,
    config: &AlgoConfig,
    objective: &O,
    streams: &mut Streams,
) -> Result<IterationRecord> {
    single_step(Variant::DospIncomplete, state, config, objective, streams)
}

/// Deterministic sinusoidal perturbation in place of the random one.
pub fn step_sine_baseline<O: Objective>(
    state: &mut RunState,
    config: &AlgoConfig,
    objective: &O,
    streams: &mut Streams,
) -> Result<IterationRecord> {
    single_step(Variant::SineBaseline, state, config, objective, streams)
}

/// Stochastic gradient ascent on the exact per-sample gradient.
pub fn step_exact_gradient_baseline<O: Objective>(
    state: &mut RunState,
    config: &AlgoConfig,
    objective: &O,
    streams: &mut Streams,
) -> Result<IterationRecord> {
    single_step(Variant::ExactGradientBaseline, state, config, objective, streams)
}

/// Which iterations a run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordSchedule {
    Every,
    /// Every `stride`-th iteration counted from the first.
    Stride(u64),
    /// Every iteration up to `dense_until`, then `per_decade` log-spaced indices per decade.
    DenseThenLog { dense_until: u64, per_decade: u32 },
}

impl Default for RecordSchedule {
    fn default() -> Self {
        RecordSchedule::DenseThenLog {
            dense_until: 1000,
            per_decade: 100,
        }
    }
}

impl RecordSchedule {
    /// Sorted, distinct indices in `[first, last]`, always including `last`.
    pub fn indices(&self, first: u64, last: u64) -> Vec<u64> {
        if last < first {
            return Vec::new();
        }
        match *self {
            RecordSchedule::Every => (first..=last).collect(),
            RecordSchedule::Stride(stride) => {
                let mut out: Vec<u64> = (first..=last).step_by(stride.max(1) as usize).collect();
                if out.last() != Some(&last) {
                    out.push(last);
                }
                out
            }
            RecordSchedule::DenseThenLog {
                dense_until,
                per_decade,
            } => {
                let mut out: Vec<u64> = (first..=last.min(dense_until)).collect();
                if last > dense_until && per_decade > 0 {
                    let start = dense_until.max(1) as f64;
                    let mut j = 1u32;
                    loop {
                        let k = (start * 10f64.powf(f64::from(j) / f64::from(per_decade))).round() as u64;
                        if k > last {
                            break;
                        }
                        if k >= first && out.last().is_none_or(|l| *l < k) {
                            out.push(k);
                        }
                        j += 1;
                    }
                }
                if out.last() != Some(&last) {
                    out.push(last);
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub final_state: RunState,
}

/// Iterates `horizon` times from `state`, calling `visit` on every iteration
/// whose index is in `record_at` (sorted).
pub fn run_from<O, F>(
    config: &AlgoConfig,
    objective: &O,
    state: &mut RunState,
    horizon: u64,
    streams: &mut Streams,
    record_at: &[u64],
    mut visit: F,
) -> Result<()>
where
    O: Objective,
    F: FnMut(&IterationRecord) -> Result<()>,
{
    let mut stepper = Stepper::new(config, objective)?;
    let mut next = record_at.iter().peekable();
    for _ in 0..horizon {
        let k = state.k;
        while next.peek().is_some_and(|r| **r < k) {
            next.next();
        }
        let wanted = next.peek() == Some(&&k);
        stepper.set_nominal_utility(wanted);
        stepper.step(state, streams)?;
        if wanted {
            visit(stepper.record())?;
            next.next();
        }
    }
    Ok(())
}

/// Full run from the objective's initialization policy.
pub fn run<O: Objective>(
    config: &AlgoConfig,
    objective: &O,
    horizon: u64,
    streams: &mut Streams,
    record: RecordSchedule,
) -> Result<RunTrace> {
    if horizon == 0 {
        return Err(invalid("algo.horizon", "must be at least 1"));
    }
    let mut state = RunState::initial(config, objective, streams)?;
    let first = state.k;
    let indices = record.indices(first, first + horizon - 1);
    let mut records = Vec::with_capacity(indices.len());
    run_from(config, objective, &mut state, horizon, streams, &indices, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok(RunTrace {
        records,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::ExchangeModel;
    use crate::objectives::{PowerControl, QuadraticToy};

    fn toy_schedule() -> PowerLawSchedule {
        PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap()
    }

    #[test]
    fn projection_examples() {
        // gamma_{k_next} = 0.4 with gamma0 = 0.4 at k_next = 0.
        let schedule = PowerLawSchedule::shifted(0.1, 0.75, 0.4, 0.25).unwrap();
        let config = AlgoConfig::dosp(schedule).with_bounds(Some(Bounds::uniform(1, 0.0, 3.0).unwrap()));
        assert!((project(&[2.9], 0, &config).unwrap()[0] - 2.6).abs() < 1e-15);
        assert!((project(&[-0.5], 0, &config).unwrap()[0] - 0.4).abs() < 1e-15);
        assert_eq!(project(&[1.0], 0, &config).unwrap()[0], 1.0);

        let wide = PowerLawSchedule::shifted(0.1, 0.75, 2.0, 0.25).unwrap();
        let config = AlgoConfig::dosp(wide).with_bounds(Some(Bounds::uniform(1, 0.0, 3.0).unwrap()));
        assert!(matches!(
            project(&[1.0], 0, &config),
            Err(Error::InfeasibleProjection { .. })
        ));
        assert!(matches!(
            project(&[1.0], 0, &AlgoConfig::dosp(wide)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sine_params_validation() {
        let s = SineParams::reference_four_node();
        assert_eq!(s.frequencies, vec![63.0, 70.0, 56.0, 49.0]);
        assert_eq!(s.alpha3(), 1.5);
        assert!(SineParams::new(vec![1.0; 2], vec![3.0, 3.0], vec![0.0; 2]).is_err());
        assert!(SineParams::new(vec![1.0; 3], vec![1.0, 2.0, 3.0], vec![0.0; 3]).is_err());
        // 2 * 1 = 2.
        assert!(SineParams::new(vec![1.0; 2], vec![1.0, 2.0], vec![0.0; 2]).is_err());
        assert!(SineParams::new(vec![1.0; 2], vec![1.0], vec![0.0; 2]).is_err());
    }

    #[test]
    fn config_validation() {
        let s = toy_schedule();
        assert!(AlgoConfig::new(
            Variant::SineBaseline,
            s,
            PerturbationModel::default(),
            None,
            None,
            None
        )
        .is_err());
        assert!(AlgoConfig::new(
            Variant::Dosp,
            s,
            PerturbationModel::default(),
            None,
            None,
            Some(SineParams::reference_four_node())
        )
        .is_err());
        assert!(AlgoConfig::new(
            Variant::DospIncomplete,
            s,
            PerturbationModel::default(),
            None,
            None,
            None
        )
        .is_err());
        let toy = QuadraticToy::default();
        let mismatched = AlgoConfig::sine(s, SineParams::reference_four_node());
        assert!(Stepper::new(&mismatched, &toy).is_err());
    }

    #[test]
    fn first_sine_step_with_zero_phase_leaves_action_unchanged() {
        let toy = QuadraticToy::default();
        let sine = SineParams::new(vec![1.5; 2], vec![63.0, 70.0], vec![0.0; 2]).unwrap();
        let config = AlgoConfig::sine(toy_schedule(), sine);
        let mut state = RunState::new(&config, vec![0.3, 2.0]).unwrap();
        assert_eq!(state.t, 0.0);
        let mut streams = Streams::from_seed(1);
        let rec = step_sine_baseline(&mut state, &config, &toy, &mut streams).unwrap();
        assert_eq!(rec.phi, vec![0.0, 0.0]);
        assert_eq!(state.a, vec![0.3, 2.0]);
        // t_1 = beta_1.
        assert_eq!(state.t, toy_schedule().beta(1).unwrap());
    }

    #[test]
    fn sine_time_starts_at_beta_one_with_offset_zero() {
        let schedule = PowerLawSchedule::new(2.5, 0.75, 12.0, 0.25, 0).unwrap();
        let config = AlgoConfig::sine(schedule, SineParams::reference_four_node());
        let state = RunState::new(&config, vec![1.0; 4]).unwrap();
        assert_eq!(state.k, 1);
        assert_eq!(state.t, 2.5);
    }

    #[test]
    fn wrong_variant_is_rejected() {
        let toy = QuadraticToy::default();
        let config = AlgoConfig::dosp(toy_schedule());
        let mut state = RunState::new(&config, vec![0.0, 0.0]).unwrap();
        let mut streams = Streams::from_seed(1);
        assert!(step_exact_gradient_baseline(&mut state, &config, &toy, &mut streams).is_err());
    }

    #[test]
    fn record_indices() {
        assert_eq!(RecordSchedule::Every.indices(0, 3), vec![0, 1, 2, 3]);
        assert_eq!(RecordSchedule::Stride(4).indices(1, 10), vec![1, 5, 9, 10]);
        let r = RecordSchedule::DenseThenLog {
            dense_until: 10,
            per_decade: 10,
        };
        let idx = r.indices(0, 1000);
        assert_eq!(&idx[..11], &(0..=10).collect::<Vec<_>>()[..]);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*idx.last().unwrap(), 1000);
        assert!(idx.contains(&100));
        assert_eq!(RecordSchedule::default().indices(0, 0), vec![0]);
        assert!(RecordSchedule::default().indices(5, 4).is_empty());
    }

    #[test]
    fn power_runs_stay_feasible_from_the_first_iteration() {
        // gamma_1 = 12 exceeds the half-width 10 of (0, 20]; the scale is capped.
        let model = PowerControl::proportional_fair(4).unwrap();
        let schedule = PowerLawSchedule::new(2.5, 0.75, 12.0, 0.25, 0).unwrap();
        let config = AlgoConfig::dosp(schedule).with_bounds(model.default_bounds());
        let mut streams = Streams::from_seed(3);
        let trace = run(&config, &model, 50, &mut streams, RecordSchedule::Every).unwrap();
        let b = model.default_bounds().unwrap();
        for r in &trace.records {
            assert!(b.contains(&r.performed_action), "{r:?}");
        }
        assert!((trace.records[0].gamma - 9.9999995).abs() < 1e-12);
    }

    #[test]
    fn incomplete_requires_exchange_model_at_step_time() {
        let toy = QuadraticToy::default();
        let config = AlgoConfig::incomplete(toy_schedule(), ExchangeModel::new(0.5).unwrap());
        let mut streams = Streams::from_seed(2);
        let mut state = RunState::initial(&config, &toy, &mut streams).unwrap();
        let rec = step_dosp_incomplete(&mut state, &config, &toy, &mut streams).unwrap();
        assert!(matches!(rec.observation, Observation::PerNode(ref v) if v.len() == 2));
    }
}

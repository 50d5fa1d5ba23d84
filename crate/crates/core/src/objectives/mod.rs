//! Objective models: environment sampling, local utilities, noisy observations,
//! exact per-sample gradients and (where known) closed-form expectations.

mod power;
mod toy;

pub use power::{GainMatrix, PowerControl, PowerUtility};
pub use toy::QuadraticToy;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Nominal or performed action, one component per node.
pub type ActionVector = Vec<f64>;

/// Per-node box `[min_i, max_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Bounds {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                actual: max.len(),
            });
        }
        if min.iter().zip(&max).any(|(lo, hi)| !(lo < hi)) {
            return Err(invalid("bounds", "every lower bound must be below its upper bound"));
        }
        Ok(Self { min, max })
    }

    pub fn uniform(n: usize, min: f64, max: f64) -> Result<Self> {
        Self::new(vec![min; n], vec![max; n])
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        a.len() == self.len()
            && a
                .iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    /// Smallest half-width over the nodes.
    pub fn min_half_width(&self) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(lo, hi)| 0.5 * (hi - lo))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A stochastic multi-node utility model `f(a, S) = sum_i u_i(a, S)`.
pub trait Objective: Sync {
    type State: Clone + Send + Sync + std::fmt::Debug;

    fn n_nodes(&self) -> usize;

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn local_utility(&self, i: usize, a: &[f64], s: &Self::State) -> Result<f64>;

    fn local_utilities(&self, a: &[f64], s: &Self::State, out: &mut [f64]) -> Result<()> {
        for (i, u) in out.iter_mut().enumerate() {
            *u = self.local_utility(i, a, s)?;
        }
        Ok(())
    }

    /// Global utility evaluated from its own closed form, not by summing locals.
    fn global_utility(&self, a: &[f64], s: &Self::State) -> Result<f64>;

    /// `d f(a, s) / d a_i` for every node.
    fn exact_sample_gradient(&self, a: &[f64], s: &Self::State, out: &mut [f64]) -> Result<()>;

    /// Variance of the additive observation noise on each local utility.
    fn noise_variance(&self) -> f64;

    /// Box used for constrained runs when the configuration gives none.
    fn default_bounds(&self) -> Option<Bounds>;

    fn initial_action<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionVector;

    fn optimum(&self) -> Option<ActionVector> {
        None
    }

    fn strong_concavity(&self) -> Option<f64> {
        None
    }

    fn hessian_bound(&self) -> Option<f64> {
        None
    }

    fn expected_objective(&self, _a: &[f64]) -> Option<f64> {
        None
    }

    fn expected_gradient(&self, _a: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

pub(crate) fn check_len(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.len(),
        });
    }
    Ok(())
}

/// Noisy local utility: `u_i(a, s) + eta` with `eta ~ N(0, noise_variance)`.
pub fn observe<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    i: usize,
    a: &[f64],
    s: &O::State,
    rng: &mut R,
) -> Result<f64> {
    let u = objective.local_utility(i, a, s)?;
    Ok(u + draw_noise(objective.noise_variance(), rng))
}

/// Fills `out` with noisy local utilities. No randomness is consumed when the
/// noise variance is zero.
pub fn observe_all<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    a: &[f64],
    s: &O::State,
    rng: &mut R,
    out: &mut [f64],
) -> Result<()> {
    objective.local_utilities(a, s, out)?;
    let var = objective.noise_variance();
    if var > 0.0 {
        for u in out.iter_mut() {
            *u += draw_noise(var, rng);
        }
    }
    Ok(())
}

fn draw_noise<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> f64 {
    if variance > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        z * variance.sqrt()
    } else {
        0.0
    }
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    /// True when the value is a closed form rather than a sample average.
    pub exact: bool,
}

/// `F(a) = E_S f(a, S)`: closed form when the model has one, otherwise a
/// Monte Carlo average over `samples` state draws.
pub fn expected_objective<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    a: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if let Some(v) = objective.expected_objective(a) {
        return Ok(Estimate {
            mean: v,
            stderr: 0.0,
            exact: true,
        });
    }
    monte_carlo_objective(objective, a, samples, rng)
}

pub fn monte_carlo_objective<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    a: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let s = objective.sample_state(rng);
        let f = objective.global_utility(a, &s)?;
        sum += f;
        sum_sq += f * f;
    }
    let (mean, stderr) = mean_and_stderr(sum, sum_sq, samples);
    Ok(Estimate {
        mean,
        stderr,
        exact: false,
    })
}

/// Gradient of `F`: closed form when available, else the sample mean of exact
/// per-sample gradients, with per-component standard errors.
pub fn expected_gradient<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    a: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = objective.n_nodes();
    if let Some(g) = objective.expected_gradient(a) {
        return Ok((g, vec![0.0; n]));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut g = vec![0.0; n];
    for _ in 0..samples {
        let s = objective.sample_state(rng);
        objective.exact_sample_gradient(a, &s, &mut g)?;
        for i in 0..n {
            sum[i] += g[i];
            sum_sq[i] += g[i] * g[i];
        }
    }
    let (mean, se) = (0..n)
        .map(|i| mean_and_stderr(sum[i], sum_sq[i], samples))
        .unzip();
    Ok((mean, se))
}

pub(crate) fn mean_and_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

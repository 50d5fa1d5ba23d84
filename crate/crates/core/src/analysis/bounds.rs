//! Closed-form bounds on the estimator and on `D_k`, and Monte Carlo
//! estimators to hold them against.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::montecarlo::Moments;
use crate::error::{invalid, Error, Result};
use crate::exchange::{incomplete_estimate, ExchangeModel};
use crate::objectives::{observe_all, Estimate, Objective};
use crate::perturbation::PerturbationModel;
use crate::schedules::{PowerLawSchedule, RateDiagnostics};

/// Bias bound at perturbation scale `gamma`: `gamma n^(5/2) alpha3^3 alpha1 / (2 alpha2)`.
pub fn bias_bound_at(gamma: f64, n: usize, alpha1: f64, alpha2: f64, alpha3: f64) -> Result<f64> {
    if !(alpha1 > 0.0 && alpha2 > 0.0 && alpha3 > 0.0) {
        return Err(invalid("alpha", "constants must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", "must be nonnegative"));
    }
    Ok(gamma * (n as f64).powf(2.5) * alpha3.powi(3) * alpha1 / (2.0 * alpha2))
}

/// [`bias_bound_at`] with `gamma = gamma_k` of `schedule`.
pub fn bias_bound(
    schedule: &PowerLawSchedule,
    k: u64,
    n: usize,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
) -> Result<f64> {
    bias_bound_at(schedule.gamma(k)?, n, alpha1, alpha2, alpha3)
}

/// Per-component estimate with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl VectorEstimate {
    pub fn norm(&self) -> f64 {
        self.mean.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn stderr_norm(&self) -> f64 {
        self.stderr.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Every component within `z` standard errors of zero.
    pub fn is_zero_within(&self, z: f64) -> bool {
        self.mean.iter().zip(&self.stderr).all(|(m, s)| m.abs() <= z * s)
    }
}

/// Monte Carlo estimate of `E[phi f~(a + gamma phi, S)] / (alpha2 q gamma) - grad F(a)`.
///
/// With `exchange` the per-node partial-exchange estimate replaces the global
/// sum and `q` is the probability that a node hears at least one other node;
/// otherwise `q = 1`.
pub fn empirical_bias<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    a: &[f64],
    gamma: f64,
    perturbation: &PerturbationModel,
    exchange: Option<&ExchangeModel>,
    samples: usize,
    rng: &mut R,
) -> Result<VectorEstimate> {
    let n = objective.n_nodes();
    let grad = objective
        .expected_gradient(a)
        .ok_or_else(|| Error::Precondition("the objective has no closed-form gradient".into()))?;
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    let q = match exchange {
        Some(e) => e.q_nonempty(n)?.q_derived,
        None => 1.0,
    };
    let scale = perturbation.moments().alpha2 * q * gamma;
    let mut moments = vec![Moments::default(); n];
    let mut phi = vec![0.0; n];
    let mut performed = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut subsets = vec![Vec::new(); n];
    for _ in 0..samples {
        perturbation.fill(&mut phi, rng);
        for i in 0..n {
            performed[i] = a[i] + gamma * phi[i];
        }
        let s = objective.sample_state(rng);
        observe_all(objective, &performed, &s, rng, &mut u)?;
        match exchange {
            Some(e) => {
                e.sample_subsets_into(rng, &mut subsets);
                for i in 0..n {
                    let f_i = incomplete_estimate(i, &u, &subsets[i])?;
                    moments[i].push(phi[i] * f_i / scale);
                }
            }
            None => {
                let f: f64 = u.iter().sum();
                for i in 0..n {
                    moments[i].push(phi[i] * f / scale);
                }
            }
        }
    }
    Ok(VectorEstimate {
        mean: moments.iter().zip(&grad).map(|(m, g)| m.mean() - g).collect(),
        stderr: moments.iter().map(Moments::stderr).collect(),
    })
}

/// `E ||phi f(a + gamma phi, S)||^2` at a fixed action, by sampling.
pub fn second_moment_at<O: Objective, R: Rng + ?Sized>(
    objective: &O,
    a: &[f64],
    gamma: f64,
    perturbation: &PerturbationModel,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if samples < 1000 {
        return Err(invalid("samples", "need at least 1000 samples"));
    }
    let n = objective.n_nodes();
    let mut m = Moments::default();
    let mut phi = vec![0.0; n];
    let mut performed = vec![0.0; n];
    let mut u = vec![0.0; n];
    for _ in 0..samples {
        perturbation.fill(&mut phi, rng);
        for i in 0..n {
            performed[i] = a[i] + gamma * phi[i];
        }
        let s = objective.sample_state(rng);
        observe_all(objective, &performed, &s, rng, &mut u)?;
        let f: f64 = u.iter().sum();
        m.push(phi.iter().map(|p| p * p).sum::<f64>() * f * f);
    }
    Ok(Estimate {
        mean: m.mean(),
        stderr: m.stderr(),
        exact: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Configured,
    Empirical,
}

/// Bound on the second moment of the update direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MEstimate {
    pub value: f64,
    pub provenance: Provenance,
}

pub const DEFAULT_M_SAFETY: f64 = 1.5;

impl MEstimate {
    pub fn configured(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid("M", "must be finite and nonnegative"));
        }
        Ok(Self {
            value,
            provenance: Provenance::Configured,
        })
    }

    /// `safety * max_k E||g_k||^2` from a per-iteration series of means.
    pub fn from_series(mean_sq_norms: &[f64], safety: f64) -> Result<Self> {
        if mean_sq_norms.is_empty() {
            return Err(invalid("M", "empty series"));
        }
        if !(safety >= 1.0) {
            return Err(invalid("M.safety", "must be at least 1"));
        }
        let max = mean_sq_norms.iter().fold(0.0f64, |m, x| m.max(*x));
        Ok(Self {
            value: safety * max,
            provenance: Provenance::Empirical,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeVariant {
    Complete,
    Incomplete,
}

/// Constants of `D_{k+1} <= (1 - A beta gamma) D + B beta gamma^2 sqrt(D) + C beta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub variant: ExchangeVariant,
    pub q: f64,
    pub m: MEstimate,
}

impl RateConstants {
    /// `A = 2 alpha2 alpha5`, `B = n^(5/2) alpha1 alpha3^3`, `C = M`.
    pub fn complete(n: usize, alpha1: f64, alpha2: f64, alpha3: f64, alpha5: f64, m: MEstimate) -> Result<Self> {
        Self::incomplete(n, alpha1, alpha2, alpha3, alpha5, 1.0, m).map(|c| Self {
            variant: ExchangeVariant::Complete,
            ..c
        })
    }

    /// As [`RateConstants::complete`] with `A` and `B` scaled by `q`.
    pub fn incomplete(
        n: usize,
        alpha1: f64,
        alpha2: f64,
        alpha3: f64,
        alpha5: f64,
        q: f64,
        m: MEstimate,
    ) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha2 > 0.0 && alpha3 > 0.0 && alpha5 > 0.0) {
            return Err(invalid("alpha", "constants must be positive"));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(invalid("q", "must lie in (0, 1]"));
        }
        Ok(Self {
            a: q * 2.0 * alpha2 * alpha5,
            b: q * (n as f64).powf(2.5) * alpha1 * alpha3.powi(3),
            c: m.value,
            variant: ExchangeVariant::Incomplete,
            q,
            m,
        })
    }

    /// Right-hand side of the one-step recursion.
    pub fn recursion_rhs(&self, d: f64, beta: f64, gamma: f64) -> f64 {
        (1.0 - self.a * beta * gamma) * d + self.b * beta * gamma * gamma * d.max(0.0).sqrt() + self.c * beta * beta
    }

    /// Derivative of [`RateConstants::recursion_rhs`] in `d`.
    fn recursion_slope(&self, d: f64, beta: f64, gamma: f64) -> f64 {
        let root = d.max(f64::MIN_POSITIVE).sqrt();
        (1.0 - self.a * beta * gamma) + self.b * beta * gamma * gamma / (2.0 * root)
    }
}

/// Decreasing sequence the recursion cannot push `D_k` below:
/// `(B/(2A) gamma + sqrt((B/(2A))^2 gamma^2 + (C/A) beta/gamma))^2`.
pub fn lemma5_floor(constants: &RateConstants, beta: f64, gamma: f64) -> f64 {
    let h = constants.b / (2.0 * constants.a) * gamma;
    let root = (h * h + constants.c / constants.a * beta / gamma).sqrt();
    (h + root).powi(2)
}

/// One branch of the general rate bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Branch {
    Applicable(f64),
    Inapplicable(String),
}

impl Branch {
    pub fn value(&self) -> Option<f64> {
        match self {
            Branch::Applicable(v) => Some(*v),
            Branch::Inapplicable(_) => None,
        }
    }
}

/// `theta` bounds `D_k <= theta^2 gamma_k^2`, `rho` bounds `D_k <= rho^2 beta_k / gamma_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Envelopes {
    pub k0: u64,
    pub theta: Branch,
    pub rho: Branch,
    pub constants: RateConstants,
    pub schedule: PowerLawSchedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub k: u64,
    pub theta: Option<f64>,
    pub rho: Option<f64>,
    pub lemma5_floor: f64,
}

/// Builds both branches from the schedule diagnostics and the measured `D_{K0}`.
pub fn theorem4_envelopes(
    diag: &RateDiagnostics,
    constants: &RateConstants,
    d_k0: f64,
    schedule: &PowerLawSchedule,
) -> Result<Theorem4Envelopes> {
    if !(d_k0 >= 0.0) {
        return Err(invalid("D_K0", "must be nonnegative"));
    }
    let (a, b, c) = (constants.a, constants.b, constants.c);
    let k0 = diag.k0;
    let (beta0, gamma0) = (schedule.beta(k0)?, schedule.gamma(k0)?);

    let (e1, e2) = (diag.chi_sup, diag.beta_over_gamma3_sup);
    let theta = if !e2.is_finite() {
        Branch::Inapplicable("sup beta_k / gamma_k^3 is infinite (nu1 < 3 nu2)".into())
    } else if e1 >= a {
        Branch::Inapplicable(format!("sup chi_k = {e1} is not below A = {a}"))
    } else {
        let first = d_k0.sqrt() / gamma0;
        let second = (b + (b * b + 4.0 * c * e2 * (a - e1)).sqrt()) / (2.0 * (a - e1));
        Branch::Applicable(first.max(second))
    };

    let (e3, e4) = (diag.varpi_sup, diag.sqrt_gamma3_over_beta_sup);
    let rho = if !e4.is_finite() {
        Branch::Inapplicable("sup sqrt(gamma_k^3 / beta_k) is infinite (nu1 > 3 nu2)".into())
    } else if e3 >= a {
        Branch::Inapplicable(format!("sup varpi_k = {e3} is not below A = {a}"))
    } else {
        let first = (d_k0 * gamma0 / beta0).sqrt();
        let be = b * e4;
        let second = (be + (be * be + 4.0 * c * (a - e3)).sqrt()) / (2.0 * (a - e3));
        Branch::Applicable(first.max(second))
    };

    Ok(Theorem4Envelopes {
        k0,
        theta,
        rho,
        constants: *constants,
        schedule: *schedule,
    })
}

impl Theorem4Envelopes {
    /// Envelope values at `k`; branches are `None` when inapplicable or `k < K0`.
    pub fn at(&self, k: u64) -> Result<EnvelopePoint> {
        let (beta, gamma) = (self.schedule.beta(k)?, self.schedule.gamma(k)?);
        let active = k >= self.k0;
        Ok(EnvelopePoint {
            k,
            theta: self.theta.value().filter(|_| active).map(|t| t * t * gamma * gamma),
            rho: self.rho.value().filter(|_| active).map(|r| r * r * beta / gamma),
            lemma5_floor: lemma5_floor(&self.constants, beta, gamma),
        })
    }
}

/// `Omega (k + 1)^(-min{2 nu2, nu1 - nu2})`.
pub fn theorem5_envelope(schedule: &PowerLawSchedule, omega: f64, k: u64) -> f64 {
    omega * (k as f64 + 1.0).powf(-schedule.rate_exponent())
}

/// Smallest `Omega` with `values[j] <= Omega (k_j + 1)^(-exponent)` over `k_j` in `[from, to]`.
pub fn fit_omega(ks: &[u64], values: &[f64], exponent: f64, from: u64, to: u64) -> Option<f64> {
    ks.iter()
        .zip(values)
        .filter(|(k, _)| (from..=to).contains(*k))
        .map(|(k, v)| v * (*k as f64 + 1.0).powf(exponent))
        .reduce(f64::max)
}

/// `g(x) = x^(-a) (1 - (1 + x)^(-b))` and whether `g(x) < b`.
pub fn lemma7_check(a: f64, b: f64, x: f64) -> Result<(f64, bool)> {
    for (name, v) in [("a", a), ("b", b), ("x", x)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("{name} = {v} is outside (0, 1]")));
        }
    }
    let g = x.powf(-a) * -(-b * x.ln_1p()).exp_m1();
    Ok((g, g < b))
}

/// One check of the recursion between consecutive recorded iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionRow {
    pub k: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of `lhs - rhs` by the delta method, treating the two
    /// iterations' estimates as independent.
    pub combined_se: f64,
    pub holds: bool,
}

/// Checks `D_{k+1} <= rhs(D_k)` within `z` combined standard errors at every
/// recorded `k` in `[from, to]` whose successor is also recorded.
#[allow(clippy::too_many_arguments)]
pub fn lemma4_recursion_check(
    ks: &[u64],
    d: &[f64],
    d_se: &[f64],
    schedule: &PowerLawSchedule,
    constants: &RateConstants,
    from: u64,
    to: u64,
    z: f64,
) -> Result<Vec<RecursionRow>> {
    if ks.len() != d.len() || d.len() != d_se.len() {
        return Err(invalid("series", "ks, values and standard errors differ in length"));
    }
    let mut rows = Vec::new();
    for j in 0..ks.len().saturating_sub(1) {
        let k = ks[j];
        if k < from || k > to || ks[j + 1] != k + 1 {
            continue;
        }
        let (beta, gamma) = (schedule.beta(k)?, schedule.gamma(k)?);
        let lhs = d[j + 1];
        let rhs = constants.recursion_rhs(d[j], beta, gamma);
        let slope = constants.recursion_slope(d[j], beta, gamma);
        let combined_se = (d_se[j + 1].powi(2) + (slope * d_se[j]).powi(2)).sqrt();
        rows.push(RecursionRow {
            k,
            lhs,
            rhs,
            combined_se,
            holds: lhs <= rhs + z * combined_se,
        });
    }
    Ok(rows)
}

/// Central differences of the noiseless global utility.
pub fn finite_difference_gradient<O: Objective>(
    objective: &O,
    a: &[f64],
    s: &O::State,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(invalid("h", "step must be positive"));
    }
    let mut x = a.to_vec();
    (0..a.len())
        .map(|i| {
            x[i] = a[i] + h;
            let up = objective.global_utility(&x, s)?;
            x[i] = a[i] - h;
            let down = objective.global_utility(&x, s)?;
            x[i] = a[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticToy;
    use crate::schedules::rate_diagnostics;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_constants(m: f64) -> RateConstants {
        RateConstants::complete(2, 2.0, 1.0, 1.0, 1.0, MEstimate::configured(m).unwrap()).unwrap()
    }

    #[test]
    fn bias_bound_examples() {
        assert_relative_eq!(bias_bound_at(1.0, 2, 2.0, 1.0, 1.0).unwrap(), 5.656854, max_relative = 1e-6);
        assert_eq!(bias_bound_at(0.0, 2, 2.0, 1.0, 1.0).unwrap(), 0.0);
        let s = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..1000 {
            let b = bias_bound(&s, k, 2, 2.0, 1.0, 1.0).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!(bias_bound_at(1.0, 2, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn toy_constants_example() {
        let c = toy_constants(1.0);
        assert_eq!(c.a, 2.0);
        assert_relative_eq!(c.b, 2f64.powf(2.5) * 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.b, 11.3137, max_relative = 1e-5);
        let i = RateConstants::incomplete(2, 2.0, 1.0, 1.0, 1.0, 0.5, c.m).unwrap();
        assert_eq!(i.a, 1.0);
        assert_eq!(i.b, c.b / 2.0);
        assert_eq!(i.variant, ExchangeVariant::Incomplete);
    }

    #[test]
    fn zero_second_moment_for_zero_objective() {
        let m = MEstimate::from_series(&[0.0, 0.0], DEFAULT_M_SAFETY).unwrap();
        assert_eq!(m.value, 0.0);
        assert_eq!(m.provenance, Provenance::Empirical);
        assert!(MEstimate::from_series(&[], 1.5).is_err());
    }

    #[test]
    fn theorem4_branches() {
        let s = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
        let c = toy_constants(10.0);
        let diag = rate_diagnostics(&s, c.a, 1, 10_000).unwrap();
        let env = theorem4_envelopes(&diag, &c, 0.0, &s).unwrap();
        // nu1 = 3 nu2: both suprema finite.
        let e1 = diag.chi_sup;
        let e2 = diag.beta_over_gamma3_sup;
        let second = (c.b + (c.b * c.b + 4.0 * c.c * e2 * (c.a - e1)).sqrt()) / (2.0 * (c.a - e1));
        assert_relative_eq!(env.theta.value().unwrap(), second, max_relative = 1e-15);
        assert!(env.rho.value().is_some());

        let steep = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.2).unwrap();
        let diag = rate_diagnostics(&steep, c.a, 1, 10_000).unwrap();
        let env = theorem4_envelopes(&diag, &c, 1.0, &steep).unwrap();
        assert!(matches!(env.rho, Branch::Inapplicable(_)));
        assert!(env.theta.value().is_some());
    }

    #[test]
    fn envelopes_dominate_the_floor() {
        let c = toy_constants(7.0);
        for (nu1, nu2, d0) in [(0.75, 0.25, 0.0), (0.75, 0.25, 9.0), (0.7, 0.2, 1.0), (0.6, 0.25, 3.0)] {
            let s = PowerLawSchedule::shifted(0.5, nu1, 1.0, nu2).unwrap();
            let diag = rate_diagnostics(&s, c.a, 1, 100_000).unwrap();
            let env = theorem4_envelopes(&diag, &c, d0, &s).unwrap();
            for k in (diag.k0..100_000).step_by(97) {
                let p = env.at(k).unwrap();
                for v in [p.theta, p.rho].into_iter().flatten() {
                    assert!(v >= p.lemma5_floor * (1.0 - 1e-12), "{nu1} {nu2} k={k}: {v} < {}", p.lemma5_floor);
                }
            }
        }
    }

    #[test]
    fn theorem5_examples() {
        let s = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
        assert_relative_eq!(theorem5_envelope(&s, 2.0, 3), 1.0, max_relative = 1e-15);
        assert!(theorem5_envelope(&s, 2.0, u64::MAX / 2) < 1e-8);
        for (nu1, nu2) in [(0.55, 0.15), (0.7, 0.15), (0.5, 0.2), (0.65, 0.35)] {
            let s = PowerLawSchedule::shifted(0.4, nu1, 1.0, nu2).unwrap();
            assert!((s.rate_exponent() - 0.3).abs() < 1e-12);
        }
        assert_eq!(fit_omega(&[1, 3], &[1.0, 0.5], 0.5, 0, 10), Some(2f64.sqrt()));
        assert_eq!(fit_omega(&[1, 3], &[1.0, 0.5], 0.5, 2, 10), Some(1.0));
        assert_eq!(fit_omega(&[1, 3], &[1.0, 0.5], 0.5, 5, 10), None);
    }

    #[test]
    fn lemma7_examples() {
        let (g, holds) = lemma7_check(1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(g, 1.0 - 2f64.powf(-0.5), max_relative = 1e-14);
        assert!(holds);
        let (g, _) = lemma7_check(1.0, 0.5, 1e-8).unwrap();
        assert!((g - 0.5).abs() < 1e-6);
        assert!(lemma7_check(0.0, 0.5, 0.5).is_err());
        assert!(lemma7_check(0.5, 1.5, 0.5).is_err());
    }

    #[test]
    fn recursion_rows_need_consecutive_indices() {
        let s = PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap();
        let c = toy_constants(1.0);
        let rows = lemma4_recursion_check(&[5, 6, 8], &[1.0, 0.9, 0.8], &[0.0; 3], &s, &c, 0, 100, 4.0).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].k, 5);
        let (b, g) = (s.beta(5).unwrap(), s.gamma(5).unwrap());
        assert_relative_eq!(rows[0].rhs, (1.0 - 2.0 * b * g) + c.b * b * g * g + b * b, max_relative = 1e-14);
    }

    #[test]
    fn toy_bias_is_zero_within_noise() {
        let toy = QuadraticToy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let est = empirical_bias(&toy, &[2.0, 1.0], 0.5, &PerturbationModel::default(), None, 100_000, &mut rng).unwrap();
        assert!(est.is_zero_within(4.0), "{est:?}");
        assert!(est.norm() <= bias_bound_at(0.5, 2, 2.0, 1.0, 1.0).unwrap() + 4.0 * est.stderr_norm());
    }

    #[test]
    fn finite_differences_on_the_toy() {
        let toy = QuadraticToy::default();
        let fd = finite_difference_gradient(&toy, &[0.3, 1.7], &[0.9, 1.2], 1e-5).unwrap();
        let mut g = [0.0; 2];
        toy.exact_sample_gradient(&[0.3, 1.7], &[0.9, 1.2], &mut g).unwrap();
        for i in 0..2 {
            assert!((fd[i] - g[i]).abs() < 1e-8);
        }
    }
}

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{check_len, ActionVector, Bounds, Objective};
use crate::error::{invalid, Error, Result};

/// Channel gains `s[tx][rx] = |h_{tx,rx}|^2`, row-major by transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    n: usize,
    gains: Vec<f64>,
}

impl GainMatrix {
    pub fn new(n: usize, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: gains.len(),
            });
        }
        if gains.iter().any(|g| !(*g >= 0.0)) {
            return Err(invalid("gains", "channel gains must be nonnegative"));
        }
        Ok(Self { n, gains })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Gain from transmitter `tx` to receiver `rx`.
    #[inline]
    pub fn get(&self, tx: usize, rx: usize) -> f64 {
        self.gains[tx * self.n + rx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerUtility {
    /// `u_i = omega ln(1 + ln(1 + SINR_i)) - kappa a_i`, action is power.
    ProportionalFair,
    /// `u_i = omega ln(s_ii e^{a_i} / (sigma2 + sum_{j != i} s_ji e^{a_j})) - kappa e^{a_i}`,
    /// action is log-power.
    SumRate,
}

/// Interference-limited power control over `n` links. Receiver `i` sees
/// transmitter `j` through `s_ji`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerControl {
    pub utility: PowerUtility,
    pub n: usize,
    pub omega: f64,
    pub kappa: f64,
    pub sigma2: f64,
    pub noise_variance: f64,
    /// Variance of the direct-link coefficient `h_ii`.
    pub direct_variance: f64,
    /// Variance of the cross-link coefficients `h_ij`, `i != j`.
    pub cross_variance: f64,
    /// Largest transmit power.
    pub a_max: f64,
}

/// Lower end of the power box for proportional-fair runs.
pub const MIN_POWER: f64 = 1e-6;

impl PowerControl {
    pub fn new(utility: PowerUtility, n: usize) -> Result<Self> {
        let model = Self {
            utility,
            n,
            omega: 20.0,
            kappa: 1.0,
            sigma2: 0.2,
            noise_variance: 0.0,
            direct_variance: 1.0,
            cross_variance: 0.1,
            a_max: 20.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn proportional_fair(n: usize) -> Result<Self> {
        Self::new(PowerUtility::ProportionalFair, n)
    }

    pub fn sum_rate(n: usize) -> Result<Self> {
        Self::new(PowerUtility::SumRate, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("objective.n_nodes", "need at least one node"));
        }
        let positive = [
            ("omega", self.omega),
            ("kappa", self.kappa),
            ("sigma2", self.sigma2),
            ("a_max", self.a_max),
            ("direct_variance", self.direct_variance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.cross_variance >= 0.0 && self.cross_variance.is_finite()) {
            return Err(invalid("cross_variance", "must be finite and nonnegative"));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(invalid("noise_variance", "must be finite and nonnegative"));
        }
        if self.utility == PowerUtility::ProportionalFair && self.a_max <= MIN_POWER {
            return Err(invalid("a_max", format!("must exceed {MIN_POWER}")));
        }
        Ok(())
    }

    fn check_state(&self, a: &[f64], s: &GainMatrix) -> Result<()> {
        check_len(a, self.n)?;
        if s.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: s.n,
            });
        }
        Ok(())
    }

    fn check_powers(&self, a: &[f64]) -> Result<()> {
        if let Some(i) = a.iter().position(|x| !(*x >= 0.0)) {
            return Err(Error::Domain(format!(
                "transmit power of node {i} must be nonnegative, got {}",
                a[i]
            )));
        }
        Ok(())
    }

    /// `sigma2 + sum_{j != rx} a_j s_{j,rx}` (proportional fair) or with `e^{a_j}` (sum rate).
    fn interference(&self, rx: usize, a: &[f64], s: &GainMatrix) -> f64 {
        let mut total = self.sigma2;
        for (j, aj) in a.iter().enumerate() {
            if j != rx {
                let p = match self.utility {
                    PowerUtility::ProportionalFair => *aj,
                    PowerUtility::SumRate => aj.exp(),
                };
                total += p * s.get(j, rx);
            }
        }
        total
    }

    /// Signal-to-interference-plus-noise ratio at receiver `i` (proportional fair).
    pub fn sinr(&self, i: usize, a: &[f64], s: &GainMatrix) -> Result<f64> {
        self.check_state(a, s)?;
        self.check_powers(a)?;
        Ok(a[i] * s.get(i, i) / self.interference(i, a, s))
    }

    fn sum_rate_log_arg(&self, i: usize, a: &[f64], s: &GainMatrix) -> Result<f64> {
        let sii = s.get(i, i);
        if !(sii > 0.0) {
            return Err(Error::Domain(format!("direct gain of node {i} is zero")));
        }
        Ok(sii * a[i].exp() / self.interference(i, a, s))
    }
}

impl Objective for PowerControl {
    type State = GainMatrix;

    fn n_nodes(&self) -> usize {
        self.n
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> GainMatrix {
        let (sd_direct, sd_cross) = (self.direct_variance.sqrt(), self.cross_variance.sqrt());
        let mut gains = Vec::with_capacity(self.n * self.n);
        for tx in 0..self.n {
            for rx in 0..self.n {
                let z: f64 = StandardNormal.sample(rng);
                let h = z * if tx == rx { sd_direct } else { sd_cross };
                gains.push(h * h);
            }
        }
        GainMatrix { n: self.n, gains }
    }

    fn local_utility(&self, i: usize, a: &[f64], s: &GainMatrix) -> Result<f64> {
        self.check_state(a, s)?;
        if i >= self.n {
            return Err(invalid("i", format!("node index {i} out of range for {} nodes", self.n)));
        }
        match self.utility {
            PowerUtility::ProportionalFair => {
                self.check_powers(a)?;
                let sinr = a[i] * s.get(i, i) / self.interference(i, a, s);
                let rate = sinr.ln_1p();
                Ok(self.omega * rate.ln_1p() - self.kappa * a[i])
            }
            PowerUtility::SumRate => {
                Ok(self.omega * self.sum_rate_log_arg(i, a, s)?.ln() - self.kappa * a[i].exp())
            }
        }
    }

    fn global_utility(&self, a: &[f64], s: &GainMatrix) -> Result<f64> {
        self.check_state(a, s)?;
        match self.utility {
            PowerUtility::ProportionalFair => {
                self.check_powers(a)?;
                let cost: f64 = a.iter().sum::<f64>() * self.kappa;
                let mut fair = 0.0;
                for i in 0..self.n {
                    let mut denom = self.sigma2;
                    for j in (0..self.n).filter(|j| *j != i) {
                        denom += a[j] * s.get(j, i);
                    }
                    fair += (1.0 + (1.0 + a[i] * s.get(i, i) / denom).ln()).ln();
                }
                Ok(self.omega * fair - cost)
            }
            PowerUtility::SumRate => {
                let mut total = 0.0;
                for i in 0..self.n {
                    let mut denom = self.sigma2;
                    for j in (0..self.n).filter(|j| *j != i) {
                        denom += s.get(j, i) * a[j].exp();
                    }
                    let sii = s.get(i, i);
                    if !(sii > 0.0) {
                        return Err(Error::Domain(format!("direct gain of node {i} is zero")));
                    }
                    total += self.omega * (sii * a[i].exp() / denom).ln() - self.kappa * a[i].exp();
                }
                Ok(total)
            }
        }
    }

    fn exact_sample_gradient(&self, a: &[f64], s: &GainMatrix, out: &mut [f64]) -> Result<()> {
        self.check_state(a, s)?;
        check_len(out, self.n)?;
        let n = self.n;
        match self.utility {
            PowerUtility::ProportionalFair => {
                for i in 0..n {
                    if !(a[i] > 0.0) {
                        return Err(Error::Domain(format!(
                            "gradient needs positive power, node {i} has {}",
                            a[i]
                        )));
                    }
                    if !(s.get(i, i) > 0.0) {
                        return Err(Error::Domain(format!("direct gain of node {i} is zero")));
                    }
                }
                // Per receiver: I_n, SINR_n and w_n = omega / ((1 + r_n)(1 + SINR_n)).
                let mut interf = vec![0.0; n];
                let mut sinr = vec![0.0; n];
                let mut weight = vec![0.0; n];
                for m in 0..n {
                    interf[m] = self.interference(m, a, s);
                    sinr[m] = a[m] * s.get(m, m) / interf[m];
                    weight[m] = self.omega / ((1.0 + sinr[m].ln_1p()) * (1.0 + sinr[m]));
                }
                for i in 0..n {
                    let mut g = weight[i] * s.get(i, i) / interf[i] - self.kappa;
                    for m in (0..n).filter(|m| *m != i) {
                        g -= weight[m] * sinr[m] * s.get(i, m) / interf[m];
                    }
                    out[i] = g;
                }
            }
            PowerUtility::SumRate => {
                let interf: Vec<f64> = (0..n).map(|m| self.interference(m, a, s)).collect();
                for i in 0..n {
                    if !(s.get(i, i) > 0.0) {
                        return Err(Error::Domain(format!("direct gain of node {i} is zero")));
                    }
                    let ei = a[i].exp();
                    let mut g = self.omega - self.kappa * ei;
                    for m in (0..n).filter(|m| *m != i) {
                        g -= self.omega * s.get(i, m) * ei / interf[m];
                    }
                    out[i] = g;
                }
            }
        }
        Ok(())
    }

    fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    fn default_bounds(&self) -> Option<Bounds> {
        let (lo, hi) = match self.utility {
            PowerUtility::ProportionalFair => (MIN_POWER, self.a_max),
            PowerUtility::SumRate => (MIN_POWER.ln(), self.a_max.ln()),
        };
        Bounds::uniform(self.n, lo, hi).ok()
    }

    /// Uniform on `(0, a_max]` in power (or on the log-power box for sum rate).
    fn initial_action<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionVector {
        match self.utility {
            PowerUtility::ProportionalFair => (0..self.n)
                .map(|_| self.a_max * (1.0 - rng.random::<f64>()))
                .collect(),
            PowerUtility::SumRate => {
                let (lo, hi) = (MIN_POWER.ln(), self.a_max.ln());
                (0..self.n)
                    .map(|_| hi - (hi - lo) * rng.random::<f64>())
                    .collect()
            }
        }
    }
}

//! Power-law step-size pairs `beta_k = beta0 (k + o)^-nu1`, `gamma_k = gamma0 (k + o)^-nu2`
//! and the diagnostics that depend only on the schedule.
//!
//! `beta` drives the update, `gamma` scales the perturbation. The offset `o`
//! is 1 by default so that the sequences are defined at `k = 0`; with `o = 0`
//! iteration starts at `k = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default scan length for the suprema in [`rate_diagnostics`].
pub const DEFAULT_SUP_HORIZON: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSchedule {
    pub beta0: f64,
    pub nu1: f64,
    pub gamma0: f64,
    pub nu2: f64,
    pub index_offset: u32,
}

impl PowerLawSchedule {
    pub fn new(beta0: f64, nu1: f64, gamma0: f64, nu2: f64, index_offset: u32) -> Result<Self> {
        if !(beta0.is_finite() && beta0 > 0.0) {
            return Err(invalid("beta0", format!("must be positive and finite, got {beta0}")));
        }
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(invalid("gamma0", format!("must be positive and finite, got {gamma0}")));
        }
        if !nu1.is_finite() || !nu2.is_finite() {
            return Err(invalid("nu1/nu2", "exponents must be finite"));
        }
        if index_offset > 1 {
            return Err(invalid("index_offset", format!("must be 0 or 1, got {index_offset}")));
        }
        Ok(Self {
            beta0,
            nu1,
            gamma0,
            nu2,
            index_offset,
        })
    }

    /// Schedule evaluated at `k + 1`, starting at `k = 0`.
    pub fn shifted(beta0: f64, nu1: f64, gamma0: f64, nu2: f64) -> Result<Self> {
        Self::new(beta0, nu1, gamma0, nu2, 1)
    }

    /// First legal iteration index: 0 with offset 1, 1 with offset 0.
    pub fn first_index(&self) -> u64 {
        if self.index_offset == 0 {
            1
        } else {
            0
        }
    }

    fn base(&self, k: u64) -> Result<f64> {
        let base = k as f64 + f64::from(self.index_offset);
        if base <= 0.0 {
            return Err(Error::Domain(format!(
                "step sizes with index_offset 0 are undefined at k = {k}; iterate from k = 1"
            )));
        }
        Ok(base)
    }

    pub fn beta(&self, k: u64) -> Result<f64> {
        Ok(self.beta0 * self.base(k)?.powf(-self.nu1))
    }

    pub fn gamma(&self, k: u64) -> Result<f64> {
        Ok(self.gamma0 * self.base(k)?.powf(-self.nu2))
    }

    /// Rate exponent `min{2 nu2, nu1 - nu2}` of the power-law envelope.
    pub fn rate_exponent(&self) -> f64 {
        (2.0 * self.nu2).min(self.nu1 - self.nu2)
    }

    pub fn validate_a4(&self) -> A4Report {
        validate_a4(self)
    }
}

/// Outcome of the step-size admissibility checks, decided from the exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct A4Report {
    /// Both sequences vanish: `nu1 > 0` and `nu2 > 0`.
    pub vanishing: bool,
    /// `sum beta_k^2 < inf`, i.e. `nu1 > 0.5`.
    pub square_summable: bool,
    /// `sum beta_k gamma_k = inf`, i.e. `nu1 + nu2 <= 1`.
    pub product_divergent: bool,
}

impl A4Report {
    pub fn is_valid(&self) -> bool {
        self.vanishing && self.square_summable && self.product_divergent
    }

    /// Human-readable list of the failed checks, numbered (i)-(iii).
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.vanishing {
            out.push("(i) step sizes must vanish: nu1 > 0 and nu2 > 0");
        }
        if !self.square_summable {
            out.push("(ii) sum of beta_k^2 must converge: nu1 > 0.5");
        }
        if !self.product_divergent {
            out.push("(iii) sum of beta_k gamma_k must diverge: nu1 + nu2 <= 1");
        }
        out
    }
}

pub fn validate_a4(schedule: &PowerLawSchedule) -> A4Report {
    A4Report {
        vanishing: schedule.nu1 > 0.0 && schedule.nu2 > 0.0,
        square_summable: schedule.nu1 > 0.5,
        product_divergent: schedule.nu1 + schedule.nu2 <= 1.0,
    }
}

/// `1 - (1 + x)^-e`, accurate for small `x`.
fn one_minus_pow(x: f64, e: f64) -> f64 {
    -(-e * x.ln_1p()).exp_m1()
}

/// `chi_k = (1 - (gamma_{k+1}/gamma_k)^2) / (beta_k gamma_k)`.
pub fn chi(schedule: &PowerLawSchedule, k: u64) -> Result<f64> {
    let base = schedule.base(k)?;
    let bg = schedule.beta(k)? * schedule.gamma(k)?;
    Ok(one_minus_pow(1.0 / base, 2.0 * schedule.nu2) / bg)
}

/// `varpi_k = (1 - (beta_{k+1}/gamma_{k+1}) / (beta_k/gamma_k)) / (beta_k gamma_k)`.
pub fn varpi(schedule: &PowerLawSchedule, k: u64) -> Result<f64> {
    let base = schedule.base(k)?;
    let bg = schedule.beta(k)? * schedule.gamma(k)?;
    Ok(one_minus_pow(1.0 / base, schedule.nu1 - schedule.nu2) / bg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDiagnostics {
    /// `eps1 = sup_{k >= K0} chi_k`.
    pub chi_sup: f64,
    /// `eps2 = sup_{k >= K0} beta_k / gamma_k^3`; infinite iff `nu1 < 3 nu2`.
    pub beta_over_gamma3_sup: f64,
    /// `eps3 = sup_{k >= K0} varpi_k`.
    pub varpi_sup: f64,
    /// `eps4 = sup_{k >= K0} sqrt(gamma_k^3 / beta_k)`; infinite iff `nu1 > 3 nu2`.
    pub sqrt_gamma3_over_beta_sup: f64,
    /// First index `k >= K_c` with `beta_k gamma_k < 1/A`.
    pub k0: u64,
    /// `min{2 nu2, nu1 - nu2}`.
    pub exponent: f64,
}

/// First index `k >= max(k_c, first_index)` with `beta_k gamma_k < 1/a`.
pub fn contraction_index(schedule: &PowerLawSchedule, a: f64, k_c: u64) -> Result<u64> {
    if !(a > 0.0) {
        return Err(invalid("A", format!("must be positive, got {a}")));
    }
    let start = k_c.max(schedule.first_index());
    let product = |k: u64| -> Result<f64> { Ok(schedule.beta(k)? * schedule.gamma(k)?) };
    if product(start)? < 1.0 / a {
        return Ok(start);
    }
    let total = schedule.nu1 + schedule.nu2;
    if total <= 0.0 {
        return Err(Error::Domain(
            "beta_k gamma_k never drops below 1/A for non-decaying schedules".into(),
        ));
    }
    // (k + o) > (A beta0 gamma0)^(1/(nu1+nu2)); then settle by direct evaluation.
    let crossing = (a * schedule.beta0 * schedule.gamma0).powf(1.0 / total);
    let mut k = (crossing.floor() - f64::from(schedule.index_offset))
        .max(start as f64)
        .min(u64::MAX as f64 / 2.0) as u64;
    while k > start && product(k - 1)? < 1.0 / a {
        k -= 1;
    }
    while product(k)? >= 1.0 / a {
        k += 1;
    }
    Ok(k)
}

/// Schedule-only constants of the general rate theorem, with suprema taken
/// over a finite scan of `horizon` indices plus the analytic limit of the tail.
pub fn rate_diagnostics(
    schedule: &PowerLawSchedule,
    a: f64,
    k_c: u64,
    horizon: u64,
) -> Result<RateDiagnostics> {
    let k0 = contraction_index(schedule, a, k_c)?;
    let (nu1, nu2) = (schedule.nu1, schedule.nu2);
    let bg0 = schedule.beta0 * schedule.gamma0;

    let mut chi_sup = f64::NEG_INFINITY;
    let mut varpi_sup = f64::NEG_INFINITY;
    for k in k0..=k0.saturating_add(horizon) {
        chi_sup = chi_sup.max(chi(schedule, k)?);
        varpi_sup = varpi_sup.max(varpi(schedule, k)?);
    }
    // chi_k ~ 2 nu2 x^(1 - nu1 - nu2) / (beta0 gamma0) as x = 1/(k+o) -> 0.
    let tail = |rate: f64| -> f64 {
        let total = nu1 + nu2;
        if rate <= 0.0 || total < 1.0 {
            0.0
        } else if total == 1.0 {
            rate / bg0
        } else {
            f64::INFINITY
        }
    };
    chi_sup = chi_sup.max(tail(2.0 * nu2));
    varpi_sup = varpi_sup.max(tail(nu1 - nu2));

    let base0 = k0 as f64 + f64::from(schedule.index_offset);
    let beta_over_gamma3_sup = if nu1 >= 3.0 * nu2 {
        schedule.beta0 * schedule.gamma0.powi(-3) * base0.powf(-(nu1 - 3.0 * nu2))
    } else {
        f64::INFINITY
    };
    let sqrt_gamma3_over_beta_sup = if nu1 <= 3.0 * nu2 {
        schedule.beta0.powf(-0.5) * schedule.gamma0.powf(1.5) * base0.powf((nu1 - 3.0 * nu2) / 2.0)
    } else {
        f64::INFINITY
    };

    Ok(RateDiagnostics {
        chi_sup,
        beta_over_gamma3_sup,
        varpi_sup,
        sqrt_gamma3_over_beta_sup,
        k0,
        exponent: schedule.rate_exponent(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem5Condition {
    pub threshold: f64,
    pub holds: bool,
}

/// `beta0 gamma0 >= max{2 nu2, nu1 - nu2} / A`.
pub fn theorem5_condition(schedule: &PowerLawSchedule, a: f64) -> Result<Theorem5Condition> {
    if !(a > 0.0) {
        return Err(invalid("A", format!("must be positive, got {a}")));
    }
    let threshold = (2.0 * schedule.nu2).max(schedule.nu1 - schedule.nu2) / a;
    Ok(Theorem5Condition {
        threshold,
        holds: schedule.beta0 * schedule.gamma0 >= threshold,
    })
}

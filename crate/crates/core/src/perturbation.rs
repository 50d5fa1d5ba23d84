//! Bounded zero-mean i.i.d. perturbation vectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// Support `{-amplitude, +amplitude}` with equal probability.
    SymmetricBernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationModel {
    pub kind: PerturbationKind,
    pub amplitude: f64,
}

/// Second moment `alpha2 = E[phi^2]` and amplitude bound `alpha3 >= |phi|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub alpha2: f64,
    pub alpha3: f64,
}

impl Default for PerturbationModel {
    fn default() -> Self {
        Self {
            kind: PerturbationKind::SymmetricBernoulli,
            amplitude: 1.0,
        }
    }
}

impl PerturbationModel {
    pub fn bernoulli(amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid(
                "perturbation.amplitude",
                format!("must be positive and finite, got {amplitude}"),
            ));
        }
        Ok(Self {
            kind: PerturbationKind::SymmetricBernoulli,
            amplitude,
        })
    }

    pub fn moments(&self) -> Moments {
        match self.kind {
            PerturbationKind::SymmetricBernoulli => Moments {
                alpha2: self.amplitude * self.amplitude,
                alpha3: self.amplitude,
            },
        }
    }

    pub fn sample_vector<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill(&mut out, rng);
        out
    }

    /// Overwrites `out` with independent draws, one random bit per component.
    pub fn fill<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        match self.kind {
            PerturbationKind::SymmetricBernoulli => {
                for chunk in out.chunks_mut(64) {
                    let bits: u64 = rng.random();
                    for (j, phi) in chunk.iter_mut().enumerate() {
                        *phi = if (bits >> j) & 1 == 1 {
                            self.amplitude
                        } else {
                            -self.amplitude
                        };
                    }
                }
            }
        }
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_len, ActionVector, Bounds, Objective};
use crate::error::{invalid, Result};

/// Two-node quadratic `f(a, s) = -s1 a1^2 - s2 a2^2 + a1 a2 + a1 + a2` with
/// `s1, s2 ~ U[0.5, 1.5]`, so `F(a) = -a1^2 - a2^2 + a1 a2 + a1 + a2`,
/// maximized at `(1, 1)`.
///
/// Local split: `u1 = -s1 a1^2 + a1`, `u2 = -s2 a2^2 + a1 a2 + a2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticToy {
    pub noise_variance: f64,
}

impl Default for QuadraticToy {
    fn default() -> Self {
        Self {
            noise_variance: 0.0,
        }
    }
}

impl QuadraticToy {
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(invalid("noise_variance", "must be finite and nonnegative"));
        }
        Ok(Self { noise_variance })
    }

    /// Feasible set `[0, 3]^2`; also the initialization box.
    pub fn feasible_box() -> Bounds {
        Bounds::uniform(2, 0.0, 3.0).expect("static box")
    }
}

impl Objective for QuadraticToy {
    type State = [f64; 2];

    fn n_nodes(&self) -> usize {
        2
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        [rng.random_range(0.5..=1.5), rng.random_range(0.5..=1.5)]
    }

    fn local_utility(&self, i: usize, a: &[f64], s: &[f64; 2]) -> Result<f64> {
        check_len(a, 2)?;
        match i {
            0 => Ok(-s[0] * a[0] * a[0] + a[0]),
            1 => Ok(-s[1] * a[1] * a[1] + a[0] * a[1] + a[1]),
            _ => Err(invalid("i", format!("node index {i} out of range for 2 nodes"))),
        }
    }

    fn global_utility(&self, a: &[f64], s: &[f64; 2]) -> Result<f64> {
        check_len(a, 2)?;
        let (a1, a2) = (a[0], a[1]);
        Ok(-s[0] * a1 * a1 - s[1] * a2 * a2 + a1 * a2 + a1 + a2)
    }

    fn exact_sample_gradient(&self, a: &[f64], s: &[f64; 2], out: &mut [f64]) -> Result<()> {
        check_len(a, 2)?;
        check_len(out, 2)?;
        out[0] = -2.0 * s[0] * a[0] + a[1] + 1.0;
        out[1] = -2.0 * s[1] * a[1] + a[0] + 1.0;
        Ok(())
    }

    fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    fn default_bounds(&self) -> Option<Bounds> {
        Some(Self::feasible_box())
    }

    fn initial_action<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionVector {
        vec![rng.random_range(0.0..=3.0), rng.random_range(0.0..=3.0)]
    }

    fn optimum(&self) -> Option<ActionVector> {
        Some(vec![1.0, 1.0])
    }

    fn strong_concavity(&self) -> Option<f64> {
        Some(1.0)
    }

    /// Largest Hessian entry magnitude of `F`: `[[-2, 1], [1, -2]]`.
    fn hessian_bound(&self) -> Option<f64> {
        Some(2.0)
    }

    fn expected_objective(&self, a: &[f64]) -> Option<f64> {
        let (a1, a2) = (*a.first()?, *a.get(1)?);
        Some(-a1 * a1 - a2 * a2 + a1 * a2 + a1 + a2)
    }

    fn expected_gradient(&self, a: &[f64]) -> Option<Vec<f64>> {
        let (a1, a2) = (*a.first()?, *a.get(1)?);
        Some(vec![-2.0 * a1 + a2 + 1.0, -2.0 * a2 + a1 + 1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{expected_objective, monte_carlo_objective, observe};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let toy = QuadraticToy::default();
        assert_eq!(toy.global_utility(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(toy.expected_gradient(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(toy.expected_objective(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(toy.expected_gradient(&[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        let mut g = [0.0; 2];
        toy.exact_sample_gradient(&[0.0, 0.0], &[1.0, 1.0], &mut g).unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(toy.optimum().unwrap(), vec![1.0, 1.0]);
        assert_eq!(toy.strong_concavity(), Some(1.0));
        assert_eq!(toy.hessian_bound(), Some(2.0));
    }

    #[test]
    fn states_lie_in_support() {
        let toy = QuadraticToy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let s = toy.sample_state(&mut rng);
            assert!(s.iter().all(|x| (0.5..=1.5).contains(x)));
        }
    }

    #[test]
    fn local_sum_matches_global() {
        let toy = QuadraticToy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let s = toy.sample_state(&mut rng);
            let sum = toy.local_utility(0, &a, &s).unwrap() + toy.local_utility(1, &a, &s).unwrap();
            let f = toy.global_utility(&a, &s).unwrap();
            assert!((sum - f).abs() <= 1e-12 * f.abs().max(1.0));
        }
        assert!(toy.local_utility(2, &[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(toy.global_utility(&[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn strong_concavity_holds_on_grid() {
        let toy = QuadraticToy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let a = [rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)];
            let g = toy.expected_gradient(&a).unwrap();
            let d = [a[0] - 1.0, a[1] - 1.0];
            let inner = d[0] * g[0] + d[1] * g[1];
            assert!(inner <= -(d[0] * d[0] + d[1] * d[1]) + 1e-12);
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let toy = QuadraticToy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for a in [[0.0, 0.0], [2.0, 1.0], [0.5, 2.5]] {
            let est = monte_carlo_objective(&toy, &a, 100_000, &mut rng).unwrap();
            let exact = toy.expected_objective(&a).unwrap();
            assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{a:?}: {est:?} vs {exact}");
            assert!(!est.exact);
        }
        let exact = expected_objective(&toy, &[1.0, 1.0], 10, &mut rng).unwrap();
        assert!(exact.exact && exact.mean == 1.0);
    }

    #[test]
    fn noise_statistics() {
        let toy = QuadraticToy::new(0.04).unwrap();
        let quiet = QuadraticToy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = [0.7, 1.3];
        let s = [1.1, 0.9];
        assert_eq!(
            observe(&quiet, 0, &a, &s, &mut rng).unwrap(),
            quiet.local_utility(0, &a, &s).unwrap()
        );
        let n = 100_000;
        let (mut s0, mut s00, mut s1, mut s11, mut s01) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let e0 = observe(&toy, 0, &a, &s, &mut rng).unwrap() - toy.local_utility(0, &a, &s).unwrap();
            let e1 = observe(&toy, 1, &a, &s, &mut rng).unwrap() - toy.local_utility(1, &a, &s).unwrap();
            s0 += e0;
            s00 += e0 * e0;
            s1 += e1;
            s11 += e1 * e1;
            s01 += e0 * e1;
        }
        let nf = n as f64;
        let var0 = s00 / nf - (s0 / nf).powi(2);
        let var1 = s11 / nf - (s1 / nf).powi(2);
        assert!((var0 - 0.04).abs() < 0.004);
        assert!((var1 - 0.04).abs() < 0.004);
        // sd of a product of independent N(0, 0.04) draws is 0.04.
        assert!((s01 / nf).abs() < 4.0 * 0.04 / nf.sqrt());
        assert!(QuadraticToy::new(-1.0).is_err());
    }
}

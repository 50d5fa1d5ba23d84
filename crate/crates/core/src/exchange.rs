//! Random partial exchange of local utilities.
//!
//! Each node `i` hears node `j != i` independently with probability `p`,
//! freshly at every iteration, and extrapolates the global utility from the
//! values it received.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest node count accepted by [`lemma3_enumeration_oracle`].
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeModel {
    p: f64,
}

/// Probability that a node's subset is nonempty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonemptyProbability {
    /// `1 - (1 - p)^(n - 1)`: the subset draws from `n - 1` candidates.
    pub q_derived: f64,
    /// `1 - (1 - p)^n`, the exponent as printed in the reference derivation.
    pub q_paper: f64,
}

impl ExchangeModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid("exchange.p", format!("must lie in (0, 1], got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// One subset per node; subset `i` never contains `i` and is sorted.
    pub fn sample_subsets<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
        if n < 2 {
            return Err(invalid("n", "exchange needs at least two nodes"));
        }
        let mut subsets = vec![Vec::new(); n];
        self.sample_subsets_into(rng, &mut subsets);
        Ok(subsets)
    }

    /// Reuses the allocations in `subsets`; its length sets the node count.
    pub fn sample_subsets_into<R: Rng + ?Sized>(&self, rng: &mut R, subsets: &mut [Vec<usize>]) {
        let n = subsets.len();
        for (i, subset) in subsets.iter_mut().enumerate() {
            subset.clear();
            for j in (0..n).filter(|j| *j != i) {
                if rng.random::<f64>() < self.p {
                    subset.push(j);
                }
            }
        }
    }

    pub fn q_nonempty(&self, n: usize) -> Result<NonemptyProbability> {
        if n < 2 {
            return Err(invalid("n", "exchange needs at least two nodes"));
        }
        let miss = 1.0 - self.p;
        Ok(NonemptyProbability {
            q_derived: 1.0 - miss.powi(n as i32 - 1),
            q_paper: 1.0 - miss.powi(n as i32),
        })
    }
}

/// Node `i`'s estimate of the global utility from the utilities it heard:
/// `u_i + (n - 1)/|I| * sum_{j in I} u_j`, or 0 when it heard nobody.
///
/// A complete subset returns the plain sum in index order, so `p = 1`
/// reproduces the complete-information observation bit for bit.
pub fn incomplete_estimate(i: usize, utilities: &[f64], subset: &[usize]) -> Result<f64> {
    let n = utilities.len();
    if i >= n {
        return Err(invalid("i", format!("node index {i} out of range for {n} nodes")));
    }
    if subset.contains(&i) {
        return Err(Error::Precondition(format!("node {i} appears in its own subset")));
    }
    if let Some(j) = subset.iter().find(|j| **j >= n) {
        return Err(invalid("subset", format!("node index {j} out of range for {n} nodes")));
    }
    if subset.is_empty() {
        return Ok(0.0);
    }
    if subset.len() == n - 1 {
        return Ok(utilities.iter().sum());
    }
    let heard: f64 = subset.iter().map(|j| utilities[*j]).sum();
    Ok(utilities[i] + (n - 1) as f64 / subset.len() as f64 * heard)
}

/// Exact expectation of [`incomplete_estimate`] over all `2^(n-1)` subsets,
/// each weighted by `p^|I| (1 - p)^(n - 1 - |I|)`.
pub fn lemma3_enumeration_oracle(i: usize, utilities: &[f64], p: f64) -> Result<f64> {
    let n = utilities.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n < 2 {
        return Err(invalid("utilities", "need at least two nodes"));
    }
    if i >= n {
        return Err(invalid("i", format!("node index {i} out of range for {n} nodes")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    let others: Vec<usize> = (0..n).filter(|j| *j != i).collect();
    let mut expectation = 0.0;
    let mut subset = Vec::with_capacity(n - 1);
    for mask in 0u32..(1u32 << (n - 1)) {
        subset.clear();
        subset.extend(
            others
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, j)| *j),
        );
        let size = subset.len() as i32;
        let weight = p.powi(size) * (1.0 - p).powi(n as i32 - 1 - size);
        if weight > 0.0 {
            expectation += weight * incomplete_estimate(i, utilities, &subset)?;
        }
    }
    Ok(expectation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn estimate_examples() {
        let u = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(incomplete_estimate(0, &u, &[1, 2]).unwrap(), 8.5);
        assert_eq!(incomplete_estimate(0, &u, &[]).unwrap(), 0.0);
        assert_eq!(incomplete_estimate(0, &u, &[1, 2, 3]).unwrap(), 10.0);
        assert!(matches!(
            incomplete_estimate(0, &u, &[0, 1]),
            Err(Error::Precondition(_))
        ));
        assert!(incomplete_estimate(0, &u, &[7]).is_err());
        assert!(incomplete_estimate(4, &u, &[1]).is_err());
    }

    #[test]
    fn q_examples() {
        let q = ExchangeModel::new(1.0).unwrap().q_nonempty(4).unwrap();
        assert_eq!((q.q_derived, q.q_paper), (1.0, 1.0));
        let q = ExchangeModel::new(0.5).unwrap().q_nonempty(4).unwrap();
        assert_eq!(q.q_derived, 0.875);
        assert_eq!(q.q_paper, 0.9375);
        assert!(ExchangeModel::new(0.0).is_err());
        assert!(ExchangeModel::new(1.5).is_err());
    }

    #[test]
    fn oracle_examples() {
        let u = [1.0, 2.0, 3.0, 4.0];
        assert!((lemma3_enumeration_oracle(0, &u, 0.5).unwrap() - 8.75).abs() < 1e-12);
        assert_eq!(lemma3_enumeration_oracle(0, &u, 1.0).unwrap(), 10.0);
        let (a, b, p) = (1.7, -0.4, 0.3);
        let e = lemma3_enumeration_oracle(0, &[a, b], p).unwrap();
        assert!((e - p * (a + b)).abs() < 1e-15);
        assert!(matches!(
            lemma3_enumeration_oracle(0, &[0.0; 21], 0.5),
            Err(Error::TooLarge { n: 21, .. })
        ));
    }

    #[test]
    fn full_inclusion_at_p_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let subsets = ExchangeModel::new(1.0).unwrap().sample_subsets(5, &mut rng).unwrap();
        for (i, s) in subsets.iter().enumerate() {
            let expected: Vec<usize> = (0..5).filter(|j| *j != i).collect();
            assert_eq!(s, &expected);
        }
    }

    #[test]
    fn inclusion_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = ExchangeModel::new(0.5).unwrap();
        let draws = 100_000;
        let (mut included, mut empty) = (0usize, 0usize);
        let mut subsets = vec![Vec::new(); 4];
        for _ in 0..draws {
            model.sample_subsets_into(&mut rng, &mut subsets);
            assert!(subsets.iter().enumerate().all(|(i, s)| !s.contains(&i)));
            included += usize::from(subsets[0].contains(&2));
            empty += usize::from(subsets[1].is_empty());
        }
        let n = draws as f64;
        let se = |p: f64| (p * (1.0 - p) / n).sqrt();
        assert!((included as f64 / n - 0.5).abs() < 4.0 * se(0.5));
        assert!((empty as f64 / n - 0.125).abs() < 4.0 * se(0.125));
    }

    #[test]
    fn conditional_mean_per_subset_size() {
        // Averaging the estimate over all subsets of a fixed size m >= 1 gives the full sum.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6usize {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let total: f64 = u.iter().sum();
            for i in 0..n {
                let others: Vec<usize> = (0..n).filter(|j| *j != i).collect();
                for m in 1..n {
                    let (mut acc, mut count) = (0.0, 0usize);
                    for mask in 0u32..(1 << (n - 1)) {
                        if mask.count_ones() as usize != m {
                            continue;
                        }
                        let subset: Vec<usize> = others
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| mask >> b & 1 == 1)
                            .map(|(_, j)| *j)
                            .collect();
                        acc += incomplete_estimate(i, &u, &subset).unwrap();
                        count += 1;
                    }
                    assert!((acc / count as f64 - total).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sampled_mean_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = [1.0, 2.0, 3.0, 4.0];
        let model = ExchangeModel::new(0.5).unwrap();
        let draws = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let mut subsets = vec![Vec::new(); 4];
        for _ in 0..draws {
            model.sample_subsets_into(&mut rng, &mut subsets);
            let e = incomplete_estimate(0, &u, &subsets[0]).unwrap();
            sum += e;
            sum_sq += e * e;
        }
        let n = draws as f64;
        let mean = sum / n;
        let se = ((sum_sq / n - mean * mean) / n).sqrt();
        let exact = lemma3_enumeration_oracle(0, &u, 0.5).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
    }
}

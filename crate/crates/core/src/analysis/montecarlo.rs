//! Replicated runs reduced into per-iteration means and standard errors.
//!
//! Replications are grouped into fixed-size chunks; chunks run on the worker
//! pool and are merged in chunk order, so the output does not depend on the
//! number of threads or on completion order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{run_from, AlgoConfig, IterationRecord, RecordSchedule, RunState};
use crate::error::{invalid, Error, Result};
use crate::objectives::Objective;
use crate::streams::Streams;

const CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub replications: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Give every replication the streams of replication 0.
    pub identical_replications: bool,
    pub record: RecordSchedule,
}

impl MonteCarlo {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            jobs: None,
            identical_replications: false,
            record: RecordSchedule::default(),
        }
    }

    pub fn with_jobs(mut self, jobs: Option<usize>) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn with_record(mut self, record: RecordSchedule) -> Self {
        self.record = record;
        self
    }

    pub fn with_identical_replications(mut self, on: bool) -> Self {
        self.identical_replications = on;
        self
    }

    pub fn streams(&self, replication: usize) -> Streams {
        let r = if self.identical_replications { 0 } else { replication };
        Streams::new(self.seed, r as u64)
    }

    /// Runs `f` on the configured pool.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.jobs {
            None => Ok(f()),
            Some(0) => Err(invalid("jobs", "must be at least 1")),
            Some(j) => rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map(|pool| pool.install(f))
                .map_err(|e| Error::Precondition(format!("worker pool: {e}"))),
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.n - 1) as f64).max(0.0);
        (var / self.n as f64).sqrt()
    }
}

/// Per-index means with standard errors over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStat {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SeriesStat {
    fn from_moments(m: &[Moments]) -> Self {
        Self {
            mean: m.iter().map(Moments::mean).collect(),
            stderr: m.iter().map(Moments::stderr).collect(),
        }
    }
}

/// Mean squared distance to the optimum per recorded iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSeries {
    pub ks: Vec<u64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replications: usize,
}

impl DivergenceSeries {
    /// Position of iteration `k`, if recorded.
    pub fn position(&self, k: u64) -> Option<usize> {
        self.ks.binary_search(&k).ok()
    }

    /// Mean of `values[j] / reference(k_j)` over recorded `k` in `[from, to]`.
    pub fn window_mean_ratio(&self, from: u64, to: u64, reference: impl Fn(u64) -> f64) -> Option<f64> {
        let picked: Vec<f64> = self
            .ks
            .iter()
            .zip(&self.values)
            .filter(|(k, _)| (from..=to).contains(*k))
            .map(|(k, v)| v / reference(*k))
            .collect();
        if picked.is_empty() {
            None
        } else {
            Some(picked.iter().sum::<f64>() / picked.len() as f64)
        }
    }
}

/// Everything the replicated driver aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSeries {
    pub ks: Vec<u64>,
    pub replications: usize,
    /// `||a_k - a*||^2`, when an optimum was supplied.
    pub divergence: Option<SeriesStat>,
    /// Noiseless `f(a_k, S_k) / N` at the nominal action.
    pub utility_per_node: SeriesStat,
    /// `||g_k||^2` of the update direction.
    pub gradient_sq_norm: SeriesStat,
    /// Mean nominal action per recorded iteration, one row per `k`.
    pub mean_action: Vec<Vec<f64>>,
}

impl McSeries {
    pub fn divergence_series(&self) -> Option<DivergenceSeries> {
        self.divergence.as_ref().map(|d| DivergenceSeries {
            ks: self.ks.clone(),
            values: d.mean.clone(),
            stderr: d.stderr.clone(),
            replications: self.replications,
        })
    }
}

/// Squared distances of the recorded nominal actions to `a_star`.
pub fn divergence(records: &[IterationRecord], a_star: &[f64]) -> Result<Vec<(u64, f64)>> {
    records
        .iter()
        .map(|r| Ok((r.k, squared_distance(&r.nominal_action, a_star)?)))
        .collect()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            actual: a.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

struct ChunkAcc {
    d: Vec<Moments>,
    f: Vec<Moments>,
    g: Vec<Moments>,
    action: Vec<Vec<Moments>>,
}

impl ChunkAcc {
    fn new(len: usize, n: usize) -> Self {
        Self {
            d: vec![Moments::default(); len],
            f: vec![Moments::default(); len],
            g: vec![Moments::default(); len],
            action: vec![vec![Moments::default(); n]; len],
        }
    }

    fn merge(&mut self, other: &ChunkAcc) {
        let pairs = self.d.iter_mut().zip(&other.d);
        let pairs = pairs.chain(self.f.iter_mut().zip(&other.f));
        for (a, b) in pairs.chain(self.g.iter_mut().zip(&other.g)) {
            a.merge(b);
        }
        for (row, other_row) in self.action.iter_mut().zip(&other.action) {
            for (a, b) in row.iter_mut().zip(other_row) {
                a.merge(b);
            }
        }
    }
}

/// Runs `mc.replications` independent runs of `horizon` iterations each and
/// aggregates the recorded iterations.
pub fn monte_carlo<O: Objective>(
    config: &AlgoConfig,
    objective: &O,
    horizon: u64,
    a_star: Option<&[f64]>,
    mc: &MonteCarlo,
) -> Result<McSeries> {
    if mc.replications < 1 {
        return Err(invalid("replications", "must be at least 1"));
    }
    if horizon == 0 {
        return Err(invalid("algo.horizon", "must be at least 1"));
    }
    let n = objective.n_nodes();
    config.validate_for(n)?;
    if let Some(a) = a_star {
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.len(),
            });
        }
    }
    let first = config.schedule.first_index();
    let ks = mc.record.indices(first, first + horizon - 1);
    let len = ks.len();

    let one_chunk = |c: usize| -> Result<ChunkAcc> {
        let mut acc = ChunkAcc::new(len, n);
        for r in (c * CHUNK)..((c + 1) * CHUNK).min(mc.replications) {
            let mut streams = mc.streams(r);
            let mut state = RunState::initial(config, objective, &mut streams)?;
            let mut j = 0usize;
            run_from(config, objective, &mut state, horizon, &mut streams, &ks, |rec| {
                if let Some(a) = a_star {
                    acc.d[j].push(squared_distance(&rec.nominal_action, a)?);
                }
                acc.f[j].push(rec.nominal_utility / n as f64);
                acc.g[j].push(rec.gradient_estimate.iter().map(|g| g * g).sum());
                for (m, x) in acc.action[j].iter_mut().zip(&rec.nominal_action) {
                    m.push(*x);
                }
                j += 1;
                Ok(())
            })?;
        }
        Ok(acc)
    };

    let chunks = mc.replications.div_ceil(CHUNK);
    let parts: Vec<Result<ChunkAcc>> =
        mc.install(|| (0..chunks).into_par_iter().map(one_chunk).collect())?;
    let mut total = ChunkAcc::new(len, n);
    for part in parts {
        total.merge(&part?);
    }

    Ok(McSeries {
        ks,
        replications: mc.replications,
        divergence: a_star.map(|_| SeriesStat::from_moments(&total.d)),
        utility_per_node: SeriesStat::from_moments(&total.f),
        gradient_sq_norm: SeriesStat::from_moments(&total.g),
        mean_action: total
            .action
            .iter()
            .map(|row| row.iter().map(Moments::mean).collect())
            .collect(),
    })
}

/// `D_k` over `replications` runs with the default record schedule.
pub fn monte_carlo_divergence<O: Objective>(
    config: &AlgoConfig,
    objective: &O,
    horizon: u64,
    replications: usize,
    seed: u64,
    a_star: &[f64],
) -> Result<DivergenceSeries> {
    if replications < 2 {
        return Err(invalid("replications", "need at least two for a standard error"));
    }
    let mc = MonteCarlo::new(replications, seed);
    let series = monte_carlo(config, objective, horizon, Some(a_star), &mc)?;
    Ok(series.divergence_series().expect("optimum supplied"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticToy;
    use crate::schedules::PowerLawSchedule;

    fn toy_config() -> AlgoConfig {
        AlgoConfig::dosp(PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap())
            .with_bounds(Some(QuadraticToy::feasible_box()))
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|x| seq.push(*x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..11].iter().for_each(|x| a.push(*x));
        xs[11..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert!((a.mean() - seq.mean()).abs() < 1e-12);
        assert!((a.stderr() - seq.stderr()).abs() < 1e-12);
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(squared_distance(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(squared_distance(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert!(squared_distance(&[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn identical_replications_have_zero_stderr() {
        let toy = QuadraticToy::default();
        let mc = MonteCarlo::new(2, 5).with_identical_replications(true);
        let s = monte_carlo(&toy_config(), &toy, 200, Some(&[1.0, 1.0]), &mc).unwrap();
        assert!(s.divergence.unwrap().stderr.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let toy = QuadraticToy::default();
        let base = MonteCarlo::new(21, 9);
        let one = monte_carlo(&toy_config(), &toy, 300, Some(&[1.0, 1.0]), &base.clone().with_jobs(Some(1))).unwrap();
        let three = monte_carlo(&toy_config(), &toy, 300, Some(&[1.0, 1.0]), &base.with_jobs(Some(3))).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn window_ratio() {
        let d = DivergenceSeries {
            ks: vec![1, 2, 3],
            values: vec![2.0, 4.0, 6.0],
            stderr: vec![0.0; 3],
            replications: 2,
        };
        assert_eq!(d.window_mean_ratio(2, 3, |_| 2.0), Some(2.5));
        assert_eq!(d.window_mean_ratio(5, 6, |_| 2.0), None);
        assert_eq!(d.position(3), Some(2));
    }
}

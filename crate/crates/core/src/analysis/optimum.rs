//! Empirical optimum for models without a closed form: the plateau of a long
//! exact-gradient run, averaged over the last part of the run and over
//! replications, and cached per configuration for the life of the process.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objectives::{Bounds, Objective};
use crate::schedules::PowerLawSchedule;
use crate::streams::Streams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauSearch {
    pub schedule: PowerLawSchedule,
    pub bounds: Option<Bounds>,
    pub horizon: u64,
    pub replications: usize,
    pub seed: u64,
    /// Iterates after `tail_start * horizon` are averaged.
    pub tail_start: f64,
}

impl PlateauSearch {
    pub fn new(schedule: PowerLawSchedule, bounds: Option<Bounds>) -> Self {
        Self {
            schedule,
            bounds,
            horizon: 1_000_000,
            replications: 50,
            seed: 0x5EED,
            tail_start: 0.9,
        }
    }

    pub fn with_budget(mut self, horizon: u64, replications: usize) -> Self {
        self.horizon = horizon;
        self.replications = replications;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn cache() -> &'static Mutex<HashMap<String, Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Mean tail iterate of projected stochastic gradient ascent on the exact
/// per-sample gradient.
pub fn plateau_optimum<O: Objective + Debug>(objective: &O, search: &PlateauSearch) -> Result<Vec<f64>> {
    if search.horizon < 10 || search.replications == 0 {
        return Err(invalid("optimum", "need a horizon of at least 10 and one replication"));
    }
    if !(search.tail_start >= 0.0 && search.tail_start < 1.0) {
        return Err(invalid("optimum.tail_start", "must lie in [0, 1)"));
    }
    let key = format!("{objective:?}|{search:?}");
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }

    let n = objective.n_nodes();
    let first = search.schedule.first_index();
    let tail_from = first + (search.horizon as f64 * search.tail_start) as u64;
    let one = |r: usize| -> Result<Vec<f64>> {
        let mut streams = Streams::new(search.seed, r as u64);
        let mut a = objective.initial_action(&mut streams.init);
        let mut g = vec![0.0; n];
        let mut sum = vec![0.0; n];
        let mut count = 0u64;
        for k in first..first + search.horizon {
            let s = objective.sample_state(&mut streams.environment);
            objective.exact_sample_gradient(&a, &s, &mut g)?;
            let beta = search.schedule.beta(k)?;
            for i in 0..n {
                a[i] += beta * g[i];
                if let Some(b) = &search.bounds {
                    a[i] = a[i].clamp(b.min[i], b.max[i]);
                }
            }
            if k >= tail_from {
                sum.iter_mut().zip(&a).for_each(|(s, x)| *s += x);
                count += 1;
            }
        }
        Ok(sum.into_iter().map(|s| s / count as f64).collect())
    };
    let tails: Vec<Result<Vec<f64>>> = (0..search.replications).into_par_iter().map(one).collect();
    let mut mean = vec![0.0; n];
    for tail in tails {
        for (m, x) in mean.iter_mut().zip(tail?) {
            *m += x / search.replications as f64;
        }
    }
    cache().lock().expect("cache lock").insert(key, mean.clone());
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticToy;

    #[test]
    fn toy_plateau_is_near_the_optimum() {
        let toy = QuadraticToy::default();
        let search = PlateauSearch::new(PowerLawSchedule::shifted(0.5, 0.75, 1.0, 0.25).unwrap(), None)
            .with_budget(20_000, 4);
        let a = plateau_optimum(&toy, &search).unwrap();
        assert!(a.iter().all(|x| (x - 1.0).abs() < 0.05), "{a:?}");
        assert_eq!(plateau_optimum(&toy, &search).unwrap(), a);
    }
}

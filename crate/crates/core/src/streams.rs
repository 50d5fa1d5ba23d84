//! Deterministic random streams.
//!
//! Every replication owns one ChaCha8 stream per purpose, derived from
//! `(seed, replication, purpose)` alone. A replication's draws are therefore
//! independent of how many replications run, of thread scheduling, and of
//! whether another purpose consumed randomness (the exchange draws never
//! shift the perturbation or channel draws).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PURPOSES: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
enum Purpose {
    Perturbation = 0,
    Environment = 1,
    Noise = 2,
    Exchange = 3,
    Init = 4,
}

fn derive(seed: u64, replication: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication.wrapping_mul(PURPOSES) + purpose as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct Streams {
    pub perturbation: ChaCha8Rng,
    pub environment: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub exchange: ChaCha8Rng,
    pub init: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64, replication: u64) -> Self {
        Self {
            perturbation: derive(seed, replication, Purpose::Perturbation),
            environment: derive(seed, replication, Purpose::Environment),
            noise: derive(seed, replication, Purpose::Noise),
            exchange: derive(seed, replication, Purpose::Exchange),
            init: derive(seed, replication, Purpose::Init),
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }
}

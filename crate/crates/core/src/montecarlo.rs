//! Seeded random streams and Haar-average accumulation.
//!
//! Every random quantity is derived from a single 64-bit root seed. Job `k`
//! draws from ChaCha8 stream `k` of that seed, so splitting work across
//! threads never changes the numbers produced.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::qudit::{haar_random_state, Dimension, PureState};

/// Number of fixed chunks a Monte Carlo run is split into.
pub const CHUNKS: u64 = 64;

/// Independent stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Running mean and variance (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Mean and standard error of a sampled quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            std_error: 0.0,
            samples: 0,
        }
    }

    /// `|mean - target| <= k * std_error`
    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

impl From<Welford> for Estimate {
    fn from(w: Welford) -> Self {
        Estimate {
            mean: w.mean(),
            std_error: w.std_error(),
            samples: w.count(),
        }
    }
}

/// Averages `f` over `samples` Haar-random states of dimension `d`.
pub fn haar_average<F>(d: Dimension, samples: u64, seed: u64, f: F) -> Estimate
where
    F: Fn(&PureState) -> f64 + Sync,
{
    let parts: Vec<Welford> = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let lo = samples * chunk / CHUNKS;
            let hi = samples * (chunk + 1) / CHUNKS;
            let mut rng = stream(seed, chunk);
            let mut acc = Welford::default();
            for _ in lo..hi {
                acc.push(f(&haar_random_state(d, &mut rng)));
            }
            acc
        })
        .collect();
    let mut total = Welford::default();
    for p in &parts {
        total.merge(p);
    }
    total.into()
}

/// `count` Haar-random states drawn from stream `index` of `seed`.
pub fn haar_states(d: Dimension, count: usize, seed: u64, index: u64) -> Vec<PureState> {
    let mut rng = stream(seed, index);
    (0..count).map(|_| haar_random_state(d, &mut rng)).collect()
}

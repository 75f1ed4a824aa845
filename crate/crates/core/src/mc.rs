//! Reproducible Monte Carlo plumbing.
//!
//! Every trial gets its own ChaCha8 stream: the key comes from the run seed
//! and the 64-bit stream id is the trial index. A trial's draws therefore
//! depend only on `(seed, index)`, and the way trials are spread over
//! worker threads cannot change any tally.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CHUNK: u64 = 8192;

#[derive(Debug, Clone)]
pub struct TrialStreams {
    base: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn trial(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}

/// Counters that can be merged by addition.
pub trait Tally: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Runs `trials` independent trials in parallel and sums their tallies.
///
/// `body` receives the trial's private generator and the tally to update.
pub fn run_trials<T, F, E>(trials: u64, seed: u64, body: F) -> Result<T, E>
where
    T: Tally,
    E: Send,
    F: Fn(&mut ChaCha8Rng, &mut T) -> Result<(), E> + Sync,
{
    let streams = TrialStreams::new(seed);
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = T::default();
            let end = ((c + 1) * CHUNK).min(trials);
            for index in c * CHUNK..end {
                let mut rng = streams.trial(index);
                body(&mut rng, &mut tally)?;
            }
            Ok(tally)
        })
        .try_reduce(T::default, |mut a, b| {
            a.merge(b);
            Ok(a)
        })
}

/// A binomial proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                value: 0.0,
                std_error: 0.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        }
    }
}

/// Standard error of a proportion `p` estimated from `trials` draws.
pub fn binomial_std_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// `|observed − expected|` in units of the binomial standard error at the
/// expected proportion. Zero when both sides agree exactly.
pub fn sigma_distance(observed: f64, expected: f64, trials: u64) -> f64 {
    let diff = (observed - expected).abs();
    let se = binomial_std_error(expected, trials);
    if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[derive(Default)]
    struct Sum(u64, f64);

    impl Tally for Sum {
        fn merge(&mut self, other: Self) {
            self.0 += other.0;
            self.1 += other.1;
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = TrialStreams::new(7);
        let b = TrialStreams::new(7);
        let x: Vec<u64> = (0..4).map(|_| a.trial(3).random()).collect();
        let y: Vec<u64> = (0..4).map(|_| b.trial(3).random()).collect();
        assert_eq!(x, y);
        assert_ne!(a.trial(3).random::<u64>(), a.trial(4).random::<u64>());
        assert_ne!(a.trial(3).random::<u64>(), TrialStreams::new(8).trial(3).random::<u64>());
    }

    #[test]
    fn parallel_tally_matches_sequential_loop() {
        let trials = 3 * CHUNK + 17;
        let total: Sum = run_trials::<_, _, ()>(trials, 11, |rng, t: &mut Sum| {
            t.0 += 1;
            t.1 += rng.random::<f64>();
            Ok(())
        })
        .unwrap();
        let streams = TrialStreams::new(11);
        let serial: Vec<f64> = (0..trials).map(|i| streams.trial(i).random::<f64>()).collect();
        assert_eq!(total.0, trials);
        // floating sums may associate differently; integer counts do not
        assert!((total.1 - serial.iter().sum::<f64>()).abs() < 1e-6);
    }

    #[test]
    fn estimate_from_counts() {
        let e = Estimate::from_counts(25, 100);
        assert_eq!(e.value, 0.25);
        assert!((e.std_error - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(sigma_distance(0.5, 0.5, 10), 0.0);
        assert_eq!(sigma_distance(0.1, 0.0, 10), f64::INFINITY);
    }
}

//! Monte Carlo plumbing: seeded substreams, chunked parallel execution with
//! fixed-order reduction, running moments, and paired draws for common
//! random numbers.
//!
//! Draws are split into chunks of [`CHUNK`] samples; chunk `i` always uses
//! substream `i` of the run seed, and chunk results are merged in index
//! order. The output therefore depends on `(seed, n)` only, never on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Draws per chunk.
pub const CHUNK: usize = 1 << 14;

/// Minimum draw count accepted by every Monte Carlo estimator.
pub const MIN_DRAWS: usize = 100;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Random stream type: ChaCha8 has period 2^128 per stream and 2^64
/// independent streams per key.
pub type Stream = ChaCha8Rng;

/// Derive substream `index` of the key obtained from `seed` and `purpose`.
pub fn substream(seed: u64, purpose: u64, index: u64) -> Stream {
    let key = seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Stream purposes, so that unrelated estimators sharing a seed do not
/// reuse randomness by accident.
pub mod purpose {
    pub const SCALAR: u64 = 1;
    pub const COMPOSITE: u64 = 2;
    pub const MAC: u64 = 3;
    pub const MIMO: u64 = 4;
    pub const EMPIRICAL: u64 = 5;
    pub const ENSEMBLE_PARAM: u64 = 6;
}

/// Run `draw(stream, count)` and `draw(stream, count)` on identical stream
/// states, then leave the stream past whichever consumed more words.
///
/// Both closures see the same underlying uniforms (common random numbers)
/// while consecutive pairs never overlap.
pub fn paired<A, B>(
    rng: &mut Stream,
    first: impl FnOnce(&mut Stream) -> A,
    second: impl FnOnce(&mut Stream) -> B,
) -> (A, B) {
    let start = rng.get_word_pos();
    let a = first(rng);
    let end_a = rng.get_word_pos();
    rng.set_word_pos(start);
    let b = second(rng);
    let end_b = rng.get_word_pos();
    rng.set_word_pos(end_a.max(end_b));
    (a, b)
}

/// Draw count, seed and optional worker cap for one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n: usize,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        if n < MIN_DRAWS {
            return Err(Error::Parameter(format!(
                "Monte Carlo needs at least {MIN_DRAWS} draws, got {n}"
            )));
        }
        Ok(McConfig {
            n,
            seed,
            threads: None,
        })
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    fn chunk_sizes(&self) -> Vec<usize> {
        let full = self.n / CHUNK;
        let rest = self.n % CHUNK;
        let mut sizes = vec![CHUNK; full];
        if rest > 0 {
            sizes.push(rest);
        }
        sizes
    }

    /// Run `work(stream, count)` for every chunk and return chunk results in
    /// chunk order.
    pub fn run_chunks<T, F>(&self, purpose: u64, work: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut Stream, usize) -> T + Sync,
    {
        let sizes = self.chunk_sizes();
        let job = || {
            sizes
                .par_iter()
                .enumerate()
                .map(|(i, &count)| {
                    let mut rng = substream(self.seed, purpose, i as u64);
                    work(&mut rng, count)
                })
                .collect::<Vec<T>>()
        };
        match self.threads {
            Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
                Ok(pool) => pool.install(job),
                Err(_) => job(),
            },
            None => job(),
        }
    }

    /// Run a per-draw estimator producing `width` values per draw and return
    /// the merged moments of each value.
    pub fn estimate<F>(&self, purpose: u64, width: usize, per_draw: F) -> Vec<Moments>
    where
        F: Fn(&mut Stream, &mut [f64]) + Sync,
    {
        let chunks = self.run_chunks(purpose, |rng, count| {
            let mut acc = vec![Moments::default(); width];
            let mut buf = vec![0.0; width];
            for _ in 0..count {
                per_draw(rng, &mut buf);
                for (m, &v) in acc.iter_mut().zip(&buf) {
                    m.push(v);
                }
            }
            acc
        });
        let mut total = vec![Moments::default(); width];
        for chunk in chunks {
            for (t, c) in total.iter_mut().zip(&chunk) {
                t.merge(c);
            }
        }
        total
    }
}

/// Running mean and centered second moment (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * (self.count as f64) * (other.count as f64) / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Normal-approximation 95% half-width of the mean.
    pub fn ci95(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        Z95 * (self.variance() / self.count as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count, all.count);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-10);
    }

    #[test]
    fn results_do_not_depend_on_threads() {
        let base = McConfig::new(3 * CHUNK + 17, 99).unwrap();
        let run = |threads| {
            base.with_threads(threads)
                .estimate(purpose::SCALAR, 2, |rng, out| {
                    let u: f64 = rng.random();
                    out[0] = u;
                    out[1] = u * u;
                })
        };
        let one = run(Some(1));
        let eight = run(Some(8));
        assert_eq!(one, eight);
        assert_eq!(one[0].count as usize, 3 * CHUNK + 17);
    }

    #[test]
    fn paired_draws_share_uniforms_and_do_not_overlap() {
        let mut rng = substream(5, purpose::SCALAR, 0);
        let (a, b) = paired(
            &mut rng,
            |r| (r.random::<f64>(), r.random::<f64>()),
            |r| r.random::<f64>(),
        );
        assert_eq!(a.0, b);
        let next: f64 = rng.random();
        assert_ne!(next, a.1);
        let mut fresh = substream(5, purpose::SCALAR, 0);
        let _: f64 = fresh.random();
        let _: f64 = fresh.random();
        assert_eq!(fresh.random::<f64>(), next);
    }

    #[test]
    fn rejects_tiny_n() {
        assert!(McConfig::new(99, 1).is_err());
        assert!(McConfig::new(100, 1).is_ok());
    }
}

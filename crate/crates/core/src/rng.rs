//! Seeded randomness.
//!
//! Every stochastic component owns a [`StreamRng`] built from an explicit
//! 64-bit seed. ChaCha8 is platform independent and supports 2^64 independent
//! streams per seed, which is how per-member generators are split off a master
//! seed without drawing from it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for `seed` on stream 0.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `seed` on an independent stream. Stream 0 is the one
/// returned by [`seeded`].
pub fn split(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Poisson(lambda) by inverse transform over the cumulative mass function.
///
/// One uniform draw per call, so consumption of the generator is the same
/// regardless of the value returned.
pub fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u32 {
    let max = 100.max(10 * lambda.ceil() as u32);
    let threshold = rng.random::<f64>() * lambda.exp();
    let mut product = 1.0;
    let mut sum = 1.0;
    let mut k = 1u32;
    while k < max && sum <= threshold {
        product *= lambda / k as f64;
        sum += product;
        k += 1;
    }
    k - 1
}

/// Sorted sample of `k` distinct indices from `0..n` (partial Fisher-Yates).
pub fn sample_indices<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let k = k.min(n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

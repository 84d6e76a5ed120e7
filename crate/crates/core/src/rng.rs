//! Keyed random streams.
//!
//! Every random draw in the crate comes from a stream identified by a master
//! seed and a path of integer keys (replica, batch, sample, ...). Streams are
//! independent of each other, so batch elements can be processed in any order
//! or on any number of threads with identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { key: mix64(seed) }
    }

    /// Child stream for `id`. Distinct ids give unrelated streams.
    pub fn derive(self, id: u64) -> Self {
        Self {
            key: mix64(self.key.rotate_left(23) ^ mix64(id)),
        }
    }

    pub fn key(self) -> u64 {
        self.key
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}

/// Uniform index in `0..=max`. Sampled as `u64` so the draw sequence does not
/// depend on the platform's pointer width.
#[inline]
fn index_inclusive<R: Rng>(rng: &mut R, max: usize) -> usize {
    rng.random_range(0..=max as u64) as usize
}

/// Uniform random permutation of `0..n` (Fisher–Yates, descending sweep).
pub fn permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = index_inclusive(rng, i);
        perm.swap(i, j);
    }
    perm
}

/// Uniform random `k`-subset of `0..n` without replacement, in draw order.
pub fn subset<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    assert!(k <= n, "subset size {k} exceeds population {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + index_inclusive(rng, n - 1 - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

//! Reproducible, splittable random-number substreams.
//!
//! A stream is addressed by a 64-bit seed plus a path of indices (replicate,
//! role, ...). The ChaCha8 key is derived from the seed and path with a
//! splitmix64 chain, so identical `(seed, path)` pairs always yield the same
//! stream and distinct paths yield statistically independent streams. Gaussian
//! variates are produced by `rand_distr::StandardNormal` (ziggurat) on top of
//! the substream, which is deterministic given the key.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Address of a deterministic substream: seed plus derivation path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, path: Vec::new() }
    }

    /// Child stream with the given indices appended to the path.
    pub fn substream(&self, indices: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(indices);
        RngStream { seed: self.seed, path }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Instantiates the generator for this stream address.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.seed ^ 0x243f6a8885a308d3;
        let _ = splitmix64(&mut state);
        for &p in &self.path {
            state ^= splitmix64(&mut (p ^ 0x452821e638d01377));
            let _ = splitmix64(&mut state);
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// One-line description of the variate pipeline, recorded in report headers.
pub const GAUSSIAN_TRANSFORM_NOTE: &str =
    "chacha8 keyed by splitmix64(seed, path); normals via rand_distr ziggurat";

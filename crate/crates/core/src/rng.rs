//! Counter-derived random streams.
//!
//! Every random draw in a simulation is addressed by a master seed plus a
//! short path of integers (realization, step, layer, position, ...). The path
//! is hashed with SplitMix64 finalizers into a 256-bit ChaCha key, so any
//! stream can be reconstructed independently of execution order or worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seedable, splittable source of independent random streams.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RandomSource {
    master_seed: u64,
    path: Vec<u64>,
}

impl RandomSource {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed, path: Vec::new() }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child source addressed by one more path component.
    pub fn split(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self { master_seed: self.master_seed, path }
    }

    /// Child source addressed by several path components.
    pub fn split_path(&self, indices: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(indices);
        Self { master_seed: self.master_seed, path }
    }

    /// The ChaCha generator for this address. Calling this twice yields two
    /// generators that produce identical output.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        let mut acc = mix64(self.master_seed ^ GOLDEN);
        // length is absorbed so that [a] and [a, 0] differ
        acc = mix64(acc ^ (self.path.len() as u64).wrapping_mul(GOLDEN));
        for &p in &self.path {
            acc = mix64(acc.wrapping_add(GOLDEN) ^ mix64(p.wrapping_add(GOLDEN)));
        }
        for (lane, chunk) in key.chunks_exact_mut(8).enumerate() {
            let word = mix64(acc ^ (lane as u64 + 1).wrapping_mul(GOLDEN));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

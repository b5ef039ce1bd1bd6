//! Seeded randomness.
//!
//! Every randomized routine takes a [`RandomSource`]. A source is a 64-bit
//! key; independent work units draw from numbered ChaCha8 streams of that
//! key, so a parallel evaluation consumes exactly the numbers a sequential
//! one would. Named sub-sources are derived by mixing a label into the key
//! with SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child source for a named purpose.
    pub fn derive(&self, label: &str) -> RandomSource {
        RandomSource {
            seed: splitmix64(self.seed ^ splitmix64(fnv1a(label))),
        }
    }

    /// Child source for an indexed purpose (e.g. the i-th synthetic corpus).
    pub fn derive_index(&self, index: u64) -> RandomSource {
        RandomSource {
            seed: splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    /// Generator for work unit `index`.
    pub fn stream(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn identical_seed_identical_stream() {
        let a: Vec<u64> = {
            let mut r = RandomSource::new(42).stream(3);
            (0..16).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RandomSource::new(42).stream(3);
            (0..16).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn streams_and_labels_differ() {
        let src = RandomSource::new(7);
        assert_ne!(src.stream(0).next_u64(), src.stream(1).next_u64());
        assert_ne!(src.derive("a"), src.derive("b"));
        assert_ne!(src.derive_index(0), src.derive_index(1));
        assert_eq!(src.derive("a"), RandomSource::new(7).derive("a"));
    }

    #[test]
    fn stream_values_are_pinned() {
        // Guards cross-platform stability of the generator choice.
        let mut r = RandomSource::new(0).stream(0);
        let first = r.next_u64();
        let mut again = RandomSource::new(0).stream(0);
        assert_eq!(first, again.next_u64());
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
    }
}

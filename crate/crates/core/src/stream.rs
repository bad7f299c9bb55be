//! Counter-based random streams.
//!
//! A master seed keys a ChaCha8 generator; every replicate and every purpose
//! within a replicate (environment sampling, walk steps) gets its own 64-bit
//! stream id, so replicates can be run in any order on any number of workers
//! and still reproduce the same numbers.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

/// Human-readable description of how replicate streams are derived. Echoed in
/// reports so a run can be reproduced by other tooling.
pub const DERIVATION: &str =
    "ChaCha8Rng::seed_from_u64(master).set_stream(2*replicate + purpose), purpose: field=0, walk=1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `(key, counter)` into a uniformly distributed word.
#[inline]
pub fn keyed_u64(key: u64, counter: i64) -> u64 {
    mix64(key ^ mix64((counter as u64).wrapping_mul(GOLDEN).wrapping_add(GOLDEN)))
}

/// Map a word to `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derive an independent master seed for a named sub-experiment.
pub fn derive_master(master: u64, tag: &str) -> u64 {
    tag.bytes()
        .fold(mix64(master ^ GOLDEN), |acc, b| mix64(acc ^ u64::from(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Field = 0,
    Walk = 1,
}

/// Identifies the random stream of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    pub master: u64,
    pub replicate: u64,
}

impl StreamSeed {
    pub fn new(master: u64, replicate: u64) -> Self {
        StreamSeed { master, replicate }
    }

    pub fn rng(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.replicate.wrapping_mul(2).wrapping_add(purpose as u64));
        rng
    }
}

impl From<u64> for StreamSeed {
    fn from(master: u64) -> Self {
        StreamSeed::new(master, 0)
    }
}

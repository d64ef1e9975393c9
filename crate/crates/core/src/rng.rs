//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a [`RngStream`]: a 64-bit seed
//! plus a stream index. Streams with the same pair replay the same sequence,
//! distinct pairs are independent ChaCha streams. Pipelines reserve the high
//! bits of the index for a phase tag and use the low bits as a per-draw
//! counter, so parallel workers never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bits of the stream index reserved for the per-draw counter.
const COUNTER_BITS: u32 = 40;

/// Phase tags used to partition the stream index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Phase {
    Estimate = 0,
    Refine = 1,
    Select = 2,
    Evaluate = 3,
    Baseline = 4,
    Generate = 5,
    Misc = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Stream number `counter` inside `phase`.
    pub fn for_phase(seed: u64, phase: Phase, counter: u64) -> Self {
        debug_assert!(counter < (1 << COUNTER_BITS));
        Self::new(seed, ((phase as u64) << COUNTER_BITS) | counter)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

/// Derives an unrelated seed from `seed` and a tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

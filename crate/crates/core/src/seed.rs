//! Deterministic stream seeding.
//!
//! All sampling runs on ChaCha8 seeded from a single 64-bit value, which
//! replays identically on every platform. Independent streams are split off
//! a base seed with a SplitMix64-style mix, so a trial grid can grow along
//! either axis without disturbing the streams of existing cells.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all bit sampling.
pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    SampleRng::seed_from_u64(seed)
}

/// Derives the seed of an independent stream identified by `(stream, index)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut h = mix(base ^ mix(stream));
    h = mix(h ^ mix(index ^ GOLDEN_GAMMA));
    h
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

//! Deterministic random number plumbing.
//!
//! Every stochastic routine in this crate is a pure function of a `u64` seed.
//! Independent randomness consumers (the event simulator and the Brownian
//! increments of one path, or the replicates of a Monte-Carlo cell) get
//! either distinct ChaCha streams of the same key or seeds derived through a
//! SplitMix64 chain, so results do not depend on scheduling or on how much
//! randomness another consumer drew.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for event (jump time) randomness.
pub const EVENT_STREAM: u64 = 1;
/// Stream id for Brownian increment randomness.
pub const BROWNIAN_STREAM: u64 = 2;

/// ChaCha8 generator keyed by `seed` on the given stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a base seed and a list of tags.
///
/// SplitMix64 finalizer absorbing one tag per round; the same (base, tags)
/// always yields the same child, and distinct tag tuples decorrelate.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut z = base;
    for &tag in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(tag);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

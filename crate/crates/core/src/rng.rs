//! Seeded random streams.
//!
//! Every randomized pipeline draws from a ChaCha8 stream addressed by
//! `(seed, domain, index)`, where `index` is a replicate, gene row or
//! permutation number. Work can therefore be split across any number of
//! threads without changing a single drawn value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the stream namespaces of the different pipelines so that the
/// same seed never yields correlated draws across them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamDomain {
    Moments = 1,
    SimulatedDe = 2,
    SimulatedNull = 3,
    Permutation = 4,
}

const INDEX_BITS: u32 = 56;

/// Independent generator for item `index` of `domain` under `seed`.
///
/// `index` must be below 2^56.
pub fn stream(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1u64 << INDEX_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << INDEX_BITS) | index);
    rng
}

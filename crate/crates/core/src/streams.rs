//! Reproducible random streams.
//!
//! Every path is drawn from a ChaCha8 stream selected by a 64-bit seed. Seeds
//! for replications are derived from `(master seed, key...)` by a splitmix64
//! hash, so a replication's values depend only on its key and never on which
//! worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive a child seed from a master seed and an ordered list of keys.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |acc, &k| {
        splitmix64(acc ^ splitmix64(k))
    })
}

/// The generator for `seed`. Distinct seeds give unrelated streams.
pub fn rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A chunk-local generator: same seed, separate ChaCha stream id.
pub fn chunk_rng(seed: u64, chunk: u64) -> StreamRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(chunk);
    r
}

//! Seeded random streams. Every stochastic component owns a ChaCha stream
//! derived from a master seed and a string key, so runs replay bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, key: &str) -> u64 {
    key.bytes()
        .fold(mix(master), |acc, b| mix(acc ^ u64::from(b)))
}

pub fn stream(master: u64, key: &str) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(master, key))
}

/// Child stream for the `index`-th sub-component (e.g. the k-th FTPL oracle).
pub fn child(master: u64, key: &str, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(mix(derive_seed(master, key) ^ mix(index)))
}

//! Deterministic random streams.
//!
//! Every random quantity in a replication is drawn from a stream keyed by a
//! label path such as `(seed, replication, TRAIN, m, n)`. Streams never share
//! state, so results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a label path into a single 64-bit key.
pub fn derive_key(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// Independent stream for `(seed, labels...)`.
pub fn substream(seed: u64, labels: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_key(seed, labels))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

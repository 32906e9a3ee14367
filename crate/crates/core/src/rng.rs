// SPDX-License-Identifier: Apache-2.0

//! Seeded random streams.
//!
//! Every stochastic stage draws from a ChaCha8 stream keyed by a seed and a
//! stream number, so independent trials can run in any order (or in
//! parallel) and still aggregate to the same result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// RNG for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives the seed of a named stage from a master seed.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    // FNV-1a over the name, then a splitmix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(master ^ h)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream addressed by
//! `(master seed, domain, index)`. Trial `k` of a Monte-Carlo loop always
//! reads stream `k`, so results do not depend on evaluation order or on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Distinct purposes inside one experiment never share
/// a key stream.
pub mod domain {
    pub const WAVEFORM: u64 = 1;
    pub const CHANNEL: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const MC_OUTER: u64 = 4;
    pub const MC_INNER: u64 = 5;
    pub const TRIAL: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed for a sub-experiment (e.g. one grid point).
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(domain.wrapping_mul(0x1000_0000_01B3) ^ splitmix64(index)))
}

/// Random stream `index` of `domain` under `master`.
pub fn stream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

//! Deterministic derivation of independent random streams.
//!
//! Every stochastic step draws from its own ChaCha stream keyed by a base
//! seed plus a short list of integer labels (day, variable, iteration, ...),
//! so results never depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels, kept distinct so that no two consumers share a stream.
pub mod stream {
    pub const LAYOUT: u64 = 0x4c41_594f;
    pub const RAIN: u64 = 0x5241_494e;
    pub const FIELD: u64 = 0x4649_454c;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const INSITU: u64 = 0x494e_5349;
    pub const CLUSTER_INIT: u64 = 0x494e_4954;
    pub const CLUSTER_SAMPLE: u64 = 0x5341_4d50;
    pub const FOLDS: u64 = 0x464f_4c44;
    pub const DAY: u64 = 0x0044_4159;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with labels into a new 64-bit seed.
pub fn derive(base: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix(base), |acc, &l| splitmix(acc ^ splitmix(l)))
}

pub fn rng(base: u64, labels: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, labels))
}

//! Seed derivation.
//!
//! A master seed fans out into independent ChaCha8 streams. The coarse and
//! fine components of a profile use separate streams of the same key, so
//! drawing more coarse values never shifts the fine noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const COARSE_STREAM: u64 = 1;
const FINE_STREAM: u64 = 2;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coarse_rng(master: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(COARSE_STREAM);
    rng
}

pub fn fine_rng(master: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(FINE_STREAM);
    rng
}

/// Child seed for item `index` of a batch (e.g. snippet `index` of an
/// evaluation run). SplitMix64 finalizer over `master + index`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

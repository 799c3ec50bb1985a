//! Seeded randomness. Everything random in the crate flows through here.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bernoulli draw: a 53-bit uniform compared against `p`.
pub(crate) fn bernoulli(rng: &mut impl RngCore, p: f64) -> bool {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u = (rng.next_u64() >> 11) as f64 * SCALE;
    u < p
}

/// Uniform integer in `[0, bound)`.
pub(crate) fn below(rng: &mut impl RngCore, bound: u64) -> u64 {
    use rand::Rng;
    debug_assert!(bound > 0);
    rng.gen_range(0..bound)
}

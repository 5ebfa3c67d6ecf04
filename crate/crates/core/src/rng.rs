//! Deterministic RNG streams. Every randomized operation takes an explicit
//! 64-bit seed; independent streams (per grid point, per sampling pass) are
//! derived from (seed, salt) so concurrent evaluation is order-independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit mix of (seed, salt), for deriving per-task seeds.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut state = seed;
    let first = splitmix64(&mut state);
    state ^= salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    first ^ splitmix64(&mut state)
}

/// A ChaCha stream keyed by (seed, salt).
pub fn stream(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut state = seed;
    let first = splitmix64(&mut state);
    state ^= salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&first.to_le_bytes());
    for chunk in key[8..].chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

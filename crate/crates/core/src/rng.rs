//! Splittable, thread-order-independent randomness.
//!
//! Every random decision in the library derives its own stream from a master
//! seed and a list of purpose tags. Two runs with the same seed produce the
//! same streams regardless of how trials are scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

// Public tags so experiments and tests share the same stream layout.
pub const TAG_NETWORK: u64 = 0x6e65_7477_6f72_6b31;
pub const TAG_NOISE: u64 = 0x6e6f_6973_6530_3031;
pub const TAG_SAMPLING: u64 = 0x7361_6d70_6c69_6e67;
pub const TAG_RANK1: u64 = 0x7261_6e6b_316d_6178;
pub const TAG_WHITEN: u64 = 0x7768_6974_656e_3031;
pub const TAG_TEST_POINTS: u64 = 0x7465_7374_7074_7331;
pub const TAG_GD: u64 = 0x6772_6164_6465_7363;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with purpose tags into a single stream seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut state = seed ^ 0x5bf0_3635_16f5_5b4d;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag;
        out ^= splitmix64(&mut state);
    }
    out
}

/// A ChaCha stream keyed by `(seed, tags)`.
pub fn derive_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

// rand 0.9 re-exports its core under `rand::rngs`, but the SeedableRng trait
// lives in rand_core; fetch it through rand to avoid a second version.
mod rand_core {
    pub use rand::SeedableRng;
}

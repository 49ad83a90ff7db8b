//! Counter-based random streams.
//!
//! Every random decision is drawn from a ChaCha stream selected by a key
//! derived from the experiment seed and the position it decides, so results
//! do not depend on iteration order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)` owned by matrix entry `(i, k)`.
pub fn entry_uniform(seed: u64, i: usize, k: usize) -> f64 {
    let key = ((i as u64) << 32) ^ (k as u64);
    stream(seed, key).random::<f64>()
}

/// A seed for an auxiliary object derived from `seed`; used for companion
/// instances so they never share streams with their parent.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    stream(seed, u64::MAX - salt).random()
}

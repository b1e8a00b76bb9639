//! Seed handling.
//!
//! Every stochastic routine takes a single `u64` seed. The seed keys a
//! ChaCha8 generator; independent sub-streams (one per trial, grid point or
//! start vector) are selected with [`ChaCha8Rng::set_stream`], so results do
//! not depend on the order in which sub-computations run.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Generator for sub-stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for the main stream of `seed`.
pub fn root(seed: u64) -> ChaCha8Rng {
    stream(seed, 0)
}

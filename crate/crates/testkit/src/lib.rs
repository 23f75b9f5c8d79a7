//! Test support for evcheck: concrete-execution oracles that share no code
//! with the abstract analysis, random generators for programs and domain
//! objects, and the example programs used across test suites.

pub mod explore;
pub mod fixtures;
pub mod gen;
pub mod interp;
pub mod laws;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed for randomized tests: `EVCHECK_SEED` if set, a fixed default otherwise.
pub fn seed() -> u64 {
    std::env::var("EVCHECK_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0x5eed_e7c4)
}

/// Independent stream of the run seed; `stream` separates test suites.
pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

//! Reproducible random streams.
//!
//! Every unit of work (a sampled Hamiltonian, an annealing run, a bootstrap
//! resample) draws from its own ChaCha8 stream addressed by
//! `(master seed, domain, index)`, so results do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Stream for item `index` of work domain `domain` (e.g. corruption sector).
pub fn stream(seed: u64, domain: u32, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 32) | index as u64);
    rng
}

/// Mixes a label into a seed so that unrelated experiments sharing a master
/// seed do not reuse streams.
pub fn subseed(seed: u64, label: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

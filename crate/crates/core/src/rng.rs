//! Keyed random streams.
//!
//! ChaCha is counter-based: the 256-bit key holds `(seed, domain, trial)` and
//! the 64-bit stream id selects one matrix entry, so any entry can be
//! regenerated in isolation and trials can be drawn in parallel without
//! shared state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams of different uses apart under the same seed.
pub const DOMAIN_ENSEMBLE: u64 = 0x656e_7365_6d62;
pub const DOMAIN_EXPANSION: u64 = 0x0005_ca1e;

/// Generator for entry `(a, b)` of a `dim x dim` matrix.
pub fn entry_stream(
    seed: u64,
    domain: u64,
    trial: u64,
    dim: usize,
    a: usize,
    b: usize,
) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((a * dim + b) as u64);
    rng
}

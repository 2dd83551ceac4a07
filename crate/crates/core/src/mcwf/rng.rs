//! Deterministic per-trajectory random streams.
//!
//! Each trajectory seeds a counter-based ChaCha generator from
//! (master seed, trajectory index) through a SplitMix64 expansion, so
//! streams are independent, reproducible, and insensitive to thread
//! scheduling. Sweep cells derive their own master seeds from the cell
//! coordinates, never from execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The RNG stream for trajectory `index` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ GOLDEN.wrapping_mul(index.wrapping_add(1));
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Master seed for a sweep cell, a pure function of the cell coordinates
/// so that permuting execution order cannot change any cell's result.
pub fn cell_seed(master_seed: u64, pause_s: f64, pause_len: f64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325; // FNV-1a offset basis
    for b in master_seed
        .to_le_bytes()
        .iter()
        .chain(pause_s.to_bits().to_le_bytes().iter())
        .chain(pause_len.to_bits().to_le_bytes().iter())
    {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

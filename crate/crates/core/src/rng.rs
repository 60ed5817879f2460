//! Counter-keyed random streams.
//!
//! Each draw is tied to a `(seed, stream, index)` triple so results do not
//! depend on how work is split between threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed to samplers.
pub type StreamRng = ChaCha8Rng;

/// Stream identifiers used by the harness.
pub mod streams {
    pub const STATE: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const REALIZATION: u64 = 3;
    pub const SUPPORT: u64 = 4;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the 256-bit ChaCha key for one `(seed, stream, index)` cell.
pub fn stream_key(seed: u64, stream: u64, index: u64) -> [u8; 32] {
    let mut state = seed;
    let a = splitmix64(&mut state);
    state ^= stream.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let b = splitmix64(&mut state);
    state ^= index.wrapping_mul(0xA076_1D64_78BD_642F);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

/// Generator for sample `index` of `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(stream_key(seed, stream, index))
}

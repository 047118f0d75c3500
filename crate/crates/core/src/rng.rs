//! Seeded random streams.
//!
//! Every stream is a ChaCha20 generator (`rand_chacha` 0.9). The 256-bit key
//! is derived from the caller's base seed and a domain tag; the 64-bit stream
//! id selects an independent substream (for example one per repetition and
//! sample role). Streams never overlap, so work units can be generated in any
//! order or concurrently without changing their contents.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name recorded in reports so results can be traced to the generator.
pub const GENERATOR: &str = "chacha20/rand_chacha-0.9/v1";

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Returns a generator for `(seed, domain, stream)`.
pub fn stream(seed: u64, domain: u64, stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(domain.wrapping_add(0xA5A5_A5A5));
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Packs a repetition index and a small role tag into a stream id.
pub fn stream_id(repetition: u64, role: u64) -> u64 {
    debug_assert!(role < 256);
    (repetition << 8) | role
}

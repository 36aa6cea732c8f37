//! Reproducible random streams.
//!
//! All randomness is derived from one 64-bit seed and a label path, e.g.
//! `(seed, party, "share", secret id)`. Two different paths give independent
//! ChaCha streams; the same path always gives the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across platforms and runs, unlike `std`'s hasher.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives a stream from a root seed and a path of numeric labels.
pub fn derive(seed: u64, path: &[u64]) -> StreamRng {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0xA24B_AED4_963E_E407) ^ acc;
        acc = splitmix64(&mut state);
    }
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(bytes)
}

/// Convenience wrapper taking string labels.
pub fn derive_labeled(seed: u64, labels: &[&str]) -> StreamRng {
    let path: Vec<u64> = labels.iter().map(|l| label_hash(l)).collect();
    derive(seed, &path)
}

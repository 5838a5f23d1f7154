//! Seed handling.
//!
//! Every random stream is a ChaCha8 generator keyed by a 64-bit seed and
//! positioned on a 64-bit stream number. Work split into batches uses the
//! batch index as the stream number, so a result depends only on
//! `(seed, batch index)` and never on how batches are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Number of draws handled by one batch in the parallel Monte Carlo loops.
pub const BATCH: usize = 1 << 14;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stable 64-bit digest of a list of words, used to derive child seeds.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let out = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&out[..8]);
    u64::from_le_bytes(word)
}

/// Stable 64-bit digest of a byte string.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    let out = Sha256::digest(bytes);
    let mut word = [0u8; 8];
    word.copy_from_slice(&out[..8]);
    u64::from_le_bytes(word)
}

/// Splits `n` draws into `(stream, len)` batches of at most [`BATCH`].
pub fn batches(n: usize) -> impl Iterator<Item = (u64, usize)> + Clone {
    let full = n / BATCH;
    let rest = n % BATCH;
    (0..full)
        .map(|b| (b as u64, BATCH))
        .chain((rest > 0).then_some((full as u64, rest)))
}

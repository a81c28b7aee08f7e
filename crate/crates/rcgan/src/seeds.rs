//! Root-seed splitting. Every run takes one root seed; independent random
//! streams (data sampling, weight init, training batches, ...) derive their
//! own seed from it so adding a consumer never perturbs the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids. Fixed constants are part of the reproducibility contract:
/// changing them changes every seeded run.
pub mod streams {
    /// Synthetic data / dataset sampling.
    pub const DATA: u64 = 0;
    /// Network weight initialization.
    pub const INIT: u64 = 1;
    /// Training-time draws: batch shuffling, latent and penalty samples.
    pub const TRAIN: u64 = 2;
    /// Anomaly sampling for evaluation sets.
    pub const ANOMALY: u64 = 3;
    /// Train/test splitting of tabular data.
    pub const SPLIT: u64 = 4;
}

/// SplitMix64 finalizer; decorrelates consecutive stream ids.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic per-stream seed derived from the root seed.
pub fn stream_seed(root: u64, stream: u64) -> u64 {
    splitmix64(root ^ splitmix64(stream.wrapping_add(1)))
}

/// ChaCha generator for one named stream of a root seed.
pub fn stream_rng(root: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(root, stream))
}

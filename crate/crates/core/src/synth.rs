//! Deterministic synthetic input streams.
//!
//! Test corpora and benchmarks need reproducible "audio-like" feature
//! frames without shipping real data: seeded uniform noise in [-1, 1].

use crate::math::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `frames × dim` matrix of uniform noise in `[-1, 1]`, fully determined
/// by `seed`.
pub fn synthetic_frames(frames: usize, dim: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..frames * dim)
        .map(|_| rng.random_range(-1.0f32..=1.0))
        .collect();
    Mat::from_vec(frames, dim, data)
}

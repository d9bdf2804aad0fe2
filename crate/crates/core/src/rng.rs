//! Counter-based Gaussian noise keyed by `(seed, path, step)`.
//!
//! Each path owns one ChaCha8 stream; step `j` of a path always reads words
//! `4j..4j+4` of that stream. A path's noise therefore does not depend on
//! which thread generates it or in which order paths are visited.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const WORDS_PER_STEP: u128 = 4;

/// Source of standard normal pairs for one path.
pub struct PathNoise {
    rng: ChaCha8Rng,
}

impl PathNoise {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        rng.set_word_pos(0);
        PathNoise { rng }
    }

    /// Positions the stream at `step`.
    pub fn seek(&mut self, step: u64) {
        self.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
    }

    /// Two independent standard normals for the next step (Box-Muller).
    pub fn next_pair(&mut self) -> (f64, f64) {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

/// The normal pair of `(seed, path, step)` by random access.
pub fn normal_pair(seed: u64, path: u64, step: u64) -> (f64, f64) {
    let mut noise = PathNoise::new(seed, path);
    noise.seek(step);
    noise.next_pair()
}

//! Counter-based random numbers. Every draw is addressed by
//! (global seed, purpose, trajectory, step, index), so results do not depend
//! on how work is scheduled across threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Address of one noise increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedInfo {
    pub global_seed: u64,
    pub trajectory: u64,
    /// Step index; negative steps address colored-noise prehistory.
    pub step: i64,
}

impl SeedInfo {
    pub fn new(global_seed: u64, trajectory: u64, step: i64) -> Self {
        Self {
            global_seed,
            trajectory,
            step,
        }
    }

    pub fn at_step(self, step: i64) -> Self {
        Self { step, ..self }
    }
}

/// Independent families of draws sharing one global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Field = 1,
    InitialCondition = 2,
    Synthetic = 3,
}

/// A keyed ChaCha8 stream positioned at a given draw index.
pub struct CounterRng {
    inner: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(info: SeedInfo, purpose: Purpose) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&info.global_seed.to_le_bytes());
        key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        let stream = (info.trajectory << 32) | (info.step as i32 as u32 as u64);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Moves to the pair of normals with the given index.
    pub fn seek_pair(&mut self, index: u64) {
        // Each pair consumes two u64 words, i.e. four 32-bit ChaCha words.
        self.inner.set_word_pos(index as u128 * 4);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in (0, 1].
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals (Box–Muller), always two words.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open0();
        let u2 = (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Normal pair at an absolute index, independent of prior draws.
    pub fn normal_pair_at(&mut self, index: u64) -> (f64, f64) {
        self.seek_pair(index);
        self.normal_pair()
    }
}

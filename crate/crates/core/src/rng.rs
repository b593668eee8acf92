//! Seeded, splittable random sources.
//!
//! A [`SeededSource`] names a ChaCha20 keystream: the seed fixes the key and
//! the stream index selects one of 2^64 independent nonces. Monte Carlo
//! trial `t` of an operation started at `source` always reads stream
//! `source.stream() + t`, so results do not depend on how trials are
//! scheduled across threads.
//!
//! Normal variates use the cosine branch of Box-Muller with
//! `u1` in (0, 1] and `u2` in [0, 1); each normal consumes exactly two
//! 64-bit words.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededSource {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl SeededSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// The sub-stream `offset` places after this one.
    pub fn offset(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(offset),
        }
    }

    /// A disjoint block of 2^32 sub-streams, for operations that run several
    /// trial families from one source.
    pub fn lane(&self, lane: u32) -> Self {
        self.offset(u64::from(lane) << 32)
    }

    pub fn generator(&self) -> Generator {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Generator { rng }
    }
}

/// The sampling front end over one keystream.
pub struct Generator {
    rng: ChaCha20Rng,
}

impl Generator {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// `+1` with probability `p_plus`, else `-1`.
    pub fn sign(&mut self, p_plus: f64) -> f64 {
        if self.uniform() < p_plus {
            1.0
        } else {
            -1.0
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Chi-square with `dof` degrees of freedom, as a sum of squared normals.
    pub fn chi_square(&mut self, dof: usize) -> f64 {
        (0..dof).map(|_| self.standard_normal().powi(2)).sum()
    }
}

//! Seeded random streams for scenario generation and initialization.
//!
//! All randomness flows through ChaCha20 (`rand_chacha::ChaCha20Rng`), a
//! counter-based generator: a `(seed, stream)` pair fully determines the
//! sequence on every platform. Uniform variates take the top 53 bits of each
//! 64-bit word; Gaussian variates use the Box–Muller transform, one uniform
//! pair per complex sample.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::linalg::{c, CMat, CVec, C64};

/// Stream used for user/transmitter placement and channel coefficients.
pub const STREAM_CHANNELS: u64 = 0;
/// Stream used for random initial beamformers.
pub const STREAM_INIT: u64 = 1;

pub struct SeededStream {
    inner: ChaCha20Rng,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals (Box–Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // 1 - u lies in (0, 1], keeping ln finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> C64 {
        let (x, y) = self.normal_pair();
        let s = (0.5 * variance).sqrt();
        c(s * x, s * y)
    }

    pub fn complex_gaussian_vec(&mut self, n: usize, variance: f64) -> CVec {
        CVec::from_fn(n, |_, _| self.complex_gaussian(variance))
    }

    /// Column-major fill, so the draw order is fixed by the shape alone.
    pub fn complex_gaussian_mat(&mut self, rows: usize, cols: usize, variance: f64) -> CMat {
        let mut m = CMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.complex_gaussian(variance);
            }
        }
        m
    }

    /// Uniform point in the horizontal disk of `radius` around `center`.
    pub fn point_in_disk(&mut self, center: [f64; 3], radius: f64) -> [f64; 3] {
        let r = radius * self.uniform().sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.uniform();
        [center[0] + r * theta.cos(), center[1] + r * theta.sin(), center[2]]
    }
}

//! Portable seeded randomness.
//!
//! The stream generator is ChaCha20 (RFC 8439 block function, as implemented
//! by `rand_chacha`), keyed from a 64-bit seed with `seed_from_u64` and using
//! the 64-bit ChaCha stream id to address independent sub-streams. Floats are
//! built from the top 53 bits of each 64-bit output, and Gaussians use the
//! Box-Muller transform (both outputs of each pair are consumed in order), so
//! the sequence does not depend on any distribution code outside this file.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream ids for the components that draw randomness.
pub mod streams {
    pub const ADVERSARY: u64 = 1;
    pub const LEARNER: u64 = 2;
    pub const INIT: u64 = 3;
    pub const TEST: u64 = 0xFFFF;
}

const TWO_POW_53: f64 = 9_007_199_254_740_992.0;

#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha20Rng,
    seed: u64,
    stream: u64,
    spare_normal: Option<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child stream id from a parent stream id and a component key.
pub fn derive_stream(parent: u64, component: u64) -> u64 {
    splitmix64(parent ^ splitmix64(component))
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng {
            inner,
            seed,
            stream,
            spare_normal: None,
        }
    }

    /// An independent stream keyed by `(seed, stream, component)`. Does not
    /// advance `self`.
    pub fn substream(&self, component: u64) -> Rng {
        Rng::with_stream(self.seed, derive_stream(self.stream, component))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / TWO_POW_53
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_pos(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / TWO_POW_53
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_pos();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Standard exponential via inversion.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_pos().ln()
    }
}

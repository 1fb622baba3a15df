//! Seedable, reproducible random streams and the noise samplers built on them.
//!
//! A [`RandomStream`] wraps a ChaCha8 generator seeded from a 64-bit seed.
//! Child streams are derived from `(parent seed, label)` with a SplitMix64
//! mix, never from the parent's consumed state, so a harness can hand out one
//! stream per `(configuration, repetition)` and get identical draws no matter
//! how the work is scheduled.
//!
//! Gaussian draws use the Marsaglia polar method, Laplace draws use the
//! inverse CDF. Both are fixed so that seeds stay stable across releases.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::SymMatrix;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a label string to a 64-bit value (FNV-1a), for readable sub-stream
/// names such as `"eigenvalues"`.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// A single-owner deterministic random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
    zero_noise: bool,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
            zero_noise: false,
        }
    }

    /// A stream whose noise samplers all return their location parameter
    /// (zero). Mechanisms driven by it reduce to their non-private targets.
    pub fn zero_noise(seed: u64) -> Self {
        Self { zero_noise: true, ..Self::new(seed) }
    }

    pub fn with_zero_noise(mut self, on: bool) -> Self {
        self.zero_noise = on;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit words drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn is_zero_noise(&self) -> bool {
        self.zero_noise
    }

    /// Child stream for `label`. Depends only on this stream's seed and the
    /// label; inherits the zero-noise setting.
    pub fn substream(&self, label: u64) -> Self {
        let seed = splitmix64(splitmix64(self.seed) ^ splitmix64(label.wrapping_mul(GOLDEN_GAMMA) ^ 0x5bd1_e995));
        Self::new(seed).with_zero_noise(self.zero_noise)
    }

    pub fn substream_named(&self, label: &str) -> Self {
        self.substream(label_hash(label))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits. Not affected by zero-noise mode.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Seeded Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Standard normal draw that ignores zero-noise mode (used for data
    /// generation).
    pub fn raw_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }

    /// `N(0, 1)` noise draw.
    pub fn normal(&mut self) -> f64 {
        if self.zero_noise {
            return 0.0;
        }
        self.raw_normal()
    }

    /// `Lap(1)` noise draw.
    pub fn laplace_unit(&mut self) -> f64 {
        if self.zero_noise {
            return 0.0;
        }
        let u = self.uniform_open() - 0.5;
        // u in (-1/2, 1/2); |u| = 1/2 is excluded so the log is finite
        let mag = -(1.0 - 2.0 * u.abs()).ln();
        if u < 0.0 {
            -mag
        } else {
            mag
        }
    }
}

/// `d` i.i.d. standard normals.
pub fn gaussian_vector(stream: &mut RandomStream, d: usize) -> Vec<f64> {
    (0..d).map(|_| stream.normal()).collect()
}

/// One draw from the Laplace distribution with density `exp(-|x|/b) / (2b)`.
pub fn laplace_scalar(stream: &mut RandomStream, scale: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("Laplace scale must be positive and finite, got {scale}")));
    }
    Ok(scale * stream.laplace_unit())
}

/// `d` i.i.d. `Lap(1)` draws.
pub fn laplace_vector(stream: &mut RandomStream, d: usize) -> Vec<f64> {
    (0..d).map(|_| stream.laplace_unit()).collect()
}

/// Symmetric Gaussian Wigner matrix: i.i.d. `N(0, 1)` on and above the
/// diagonal, mirrored below.
pub fn sgw_matrix(stream: &mut RandomStream, d: usize) -> SymMatrix {
    SymMatrix::from_upper_fn(d, |_, _| stream.normal())
}

/// Symmetric Laplace Wigner matrix: i.i.d. `Lap(1)` on and above the
/// diagonal, mirrored below.
pub fn slw_matrix(stream: &mut RandomStream, d: usize) -> SymMatrix {
    SymMatrix::from_upper_fn(d, |_, _| stream.laplace_unit())
}

//! Seeded, splittable random streams.
//!
//! Every stochastic routine takes an [`RngSeed`] by value and derives child
//! seeds for sub-tasks (replication, coordinate, ...). Results therefore do
//! not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::Rng;

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// A `(seed, stream_id)` pair naming one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub const fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child seed for sub-task `index`.
    ///
    /// Derivation is hierarchical (`s.derive(a).derive(b)` differs from
    /// `s.derive(b).derive(a)`), and children of distinct indices land on
    /// distinct ChaCha streams of the same key.
    pub fn derive(self, index: u64) -> Self {
        let mixed = splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)));
        Self { seed: self.seed, stream_id: mixed }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform draw on `[lo, hi)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

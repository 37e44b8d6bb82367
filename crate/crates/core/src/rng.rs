//! Keyed random streams.
//!
//! Every random draw in the crate comes from a [`RngStream`]: a master seed
//! plus a 64-bit key. Child streams are derived by hashing the parent key
//! with an index, so any subtree or batch can regenerate its randomness
//! without coordinating with siblings. The generator behind a stream is
//! ChaCha8 with the key used as the stream selector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Concrete generator handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[inline]
pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, key: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream number `index`.
    #[inline]
    pub fn substream(&self, index: u64) -> Self {
        let key = splitmix(self.key ^ splitmix(index ^ 0xA076_1D64_78BD_642F));
        Self { seed: self.seed, key }
    }

    /// Child stream identified by a label, for separating roles (tree shape,
    /// colours, manipulation uniforms, ...).
    pub fn labelled(&self, label: &str) -> Self {
        let h = label
            .bytes()
            .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
        self.substream(h)
    }

    #[inline]
    pub fn rng(&self) -> StreamRng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.key);
        r
    }
}

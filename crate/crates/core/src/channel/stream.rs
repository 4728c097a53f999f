//! Counter-based random substreams.
//!
//! A substream is addressed by `(seed, index, tag)`: `seed` is the run seed,
//! `index` the realization (or sample, or epoch) counter and `tag` names the
//! consumer. Each address maps to an independent ChaCha8 stream, so results
//! never depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Address of a family of substreams sharing one `(seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub index: u64,
}

impl StreamKey {
    pub const fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// The ChaCha8 stream for consumer `tag`.
    pub fn rng(&self, tag: u64) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.index.to_le_bytes());
        bytes[16..24].copy_from_slice(b"multiris");
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(tag);
        rng
    }
}

/// Consumer tags. Channel links occupy the low range; everything else sits
/// above `1 << 32`.
pub mod tag {
    pub const DIRECT: u64 = 0;

    /// RIS `m` to RX link.
    pub const fn reflect(m: usize) -> u64 {
        1 + 2 * m as u64
    }

    /// TX to RIS `m` link.
    pub const fn incident(m: usize) -> u64 {
        2 + 2 * m as u64
    }

    pub const RX_POSITION: u64 = 1 << 32;
    pub const RANDOM_CONFIG: u64 = (1 << 32) + 1;
    pub const SHUFFLE: u64 = (1 << 32) + 2;
    pub const INIT: u64 = (1 << 32) + 3;
}

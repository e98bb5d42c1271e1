//! Seeded random streams.
//!
//! The generator is pinned here (ChaCha8) so that golden outputs stay stable.
//! Nothing else in the crate names a concrete RNG type.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SeededRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Seed for the `index`-th sub-stream (`master ^ index`).
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(self.0 ^ index)
    }

    /// Seed for a named role, e.g. balancing vs. fitting within one fold.
    /// Roles are separated in the high bits so `derive` indices never collide.
    pub fn for_role(self, role: u16, index: u64) -> RngSeed {
        RngSeed(self.0 ^ ((role as u64) << 48) ^ index)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

pub fn seeded_rng(seed: RngSeed) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed.0)
}

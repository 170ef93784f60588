//! Hierarchical seeds.
//!
//! Every randomized step draws from a stream keyed by the root seed plus a
//! fixed derivation path, so a rebuild with the same root reproduces every
//! intermediate choice, including retries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    pub path: Vec<u64>,
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed {
            value,
            path: Vec::new(),
        }
    }

    /// Child seed one level below `self`.
    pub fn derive(&self, tag: u64) -> Seed {
        let mut path = self.path.clone();
        path.push(tag);
        Seed {
            value: self.value,
            path,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = splitmix(self.value ^ 0x6c76_6c73_6600_0001);
        for &p in &self.path {
            state = splitmix(state ^ splitmix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            state = splitmix(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// SplitMix64 finalizer.
pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Path tags, one per stochastic sub-procedure.
pub mod tags {
    pub const REDUCTION: u64 = 1;
    pub const INNER_CODE: u64 = 2;
    pub const TURAN: u64 = 3;
    pub const TURAN_BASE: u64 = 4;
    pub const TURAN_HASH_PERM: u64 = 5;
    pub const TURAN_PARTITION: u64 = 6;
    pub const PHF: u64 = 7;
    pub const L1_CODE: u64 = 8;
    pub const ATTEMPT: u64 = 100;
    pub const GROUP: u64 = 200;
    pub const GEN: u64 = 300;
    pub const VERIFY: u64 = 400;
}

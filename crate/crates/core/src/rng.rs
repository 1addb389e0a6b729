//! Splittable random streams.
//!
//! Every draw is owned by a stream addressed by
//! `(master seed, purpose, replicate, stratum)`. The address is hashed into a
//! ChaCha8 key, so a replicate's points do not depend on how many other
//! replicates ran before it or on which thread ran them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for. Distinct purposes never share streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    MonteCarlo,
    Stratified,
    Optimizer,
    Anchors,
    Test,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Self::MonteCarlo => 0x4d43,
            Self::Stratified => 0x5354,
            Self::Optimizer => 0x4f50,
            Self::Anchors => 0x414e,
            Self::Test => 0x5445,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master: u64,
    pub purpose: Purpose,
    pub replicate: u64,
}

impl SeedSpec {
    pub fn new(master: u64, purpose: Purpose, replicate: u64) -> Self {
        Self {
            master,
            purpose,
            replicate,
        }
    }

    pub fn with_replicate(self, replicate: u64) -> Self {
        Self { replicate, ..self }
    }

    /// Independent spec for a labelled sub-experiment (e.g. one table cell).
    pub fn derive(self, label: u64) -> Self {
        Self {
            master: splitmix64(self.master ^ splitmix64(label ^ 0x6c61_6265_6c00_0000)),
            ..self
        }
    }

    /// Generator for one logical sub-stream (e.g. one stratum).
    pub fn stream(&self, sub: u64) -> ChaCha8Rng {
        let mut state = self.master;
        let mut seed = [0u8; 32];
        let words = [self.purpose.tag(), self.replicate, sub, 0x9e37_79b9];
        for (chunk, word) in seed.chunks_exact_mut(8).zip(words) {
            state = splitmix64(state ^ splitmix64(word));
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

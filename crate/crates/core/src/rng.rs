//! Splittable seeding.
//!
//! Every random stream in a run is a ChaCha8 generator keyed by one root seed.
//! Independent streams are selected through ChaCha's 64-bit stream counter,
//! which is derived from a `(label, index)` pair. Two streams with different
//! labels or indices never share keystream, and any stream can be recreated
//! without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, label: &str, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_id(label, index));
        rng
    }

    /// A derived root for a nested experiment (e.g. one benchmark cell).
    pub fn child(&self, label: &str, index: u64) -> SeedStreams {
        SeedStreams {
            seed: splitmix64(self.seed ^ stream_id(label, index)),
        }
    }
}

fn stream_id(label: &str, index: u64) -> u64 {
    // FNV-1a over the label, then mixed with the index.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h ^ splitmix64(index))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

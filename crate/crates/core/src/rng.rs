//! Seed derivation for reproducible fan-out.
//!
//! Every randomized stage derives its own stream from the master seed and a
//! purpose tag, so adding replicas or reordering stages never perturbs the
//! draws of another stage. Paired attacked/unattacked simulations share one
//! derived seed and consume noise in the same order, which is what makes the
//! superposition identity hold bit-for-bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the independent random consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Kalman process/measurement noise for one replica.
    Noise(u64),
    /// Allocation draws of the attacker for one replica.
    AttackerAllocation(u64),
    /// Allocation draws of the defender for one replica.
    DefenderAllocation(u64),
    /// Random-instance generators in tests and oracles.
    Instance(u64),
    /// Boundary sampling oracle for one instance.
    Oracle(u64),
}

impl Stream {
    fn tag(self) -> (u64, u64) {
        match self {
            Stream::Noise(i) => (1, i),
            Stream::AttackerAllocation(i) => (2, i),
            Stream::DefenderAllocation(i) => (3, i),
            Stream::Instance(i) => (4, i),
            Stream::Oracle(i) => (5, i),
        }
    }
}

/// SplitMix64 finalizer; a cheap, well-mixed u64 -> u64 permutation.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the sub-seed for `stream` from the master seed.
pub fn derive(master: u64, stream: Stream) -> u64 {
    let (kind, index) = stream.tag();
    splitmix(splitmix(master ^ kind.wrapping_mul(0xa076_1d64_78bd_642f)) ^ index)
}

/// Deterministic RNG for `stream`.
pub fn rng_for(master: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream))
}

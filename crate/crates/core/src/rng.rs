//! Seeded, counter-based random streams.
//!
//! Every stochastic routine takes an explicit [`Stream`]. Streams are derived
//! from a master seed and a path of labels, so two work items never share a
//! generator and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Labels for the sub-streams of one experiment seed.
pub mod label {
    pub const W_BLOCK: u64 = 0x5701;
    pub const V_BLOCK: u64 = 0x5602;
    pub const TARGET_QUBITS: u64 = 0x5103;
    pub const HIDDEN_STRING: u64 = 0x5304;
    pub const START: u64 = 0x5305;
    pub const INSTANCE: u64 = 0x4906;
    pub const NOISE: u64 = 0x4e07;
    pub const SWEEP: u64 = 0x5708;
    pub const CLIFFORD: u64 = 0x4309;
    pub const PAULI_SAMPLE: u64 = 0x500a;
    pub const PAIRS: u64 = 0x500b;
    pub const FIT: u64 = 0x460c;
    pub const SEARCH: u64 = 0x520d;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit child seed from `seed` and a label path.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p.wrapping_add(0xA076_1D64_78BD_642F))))
}

/// Opens the stream addressed by `seed` and `path`.
pub fn stream(seed: u64, path: &[u64]) -> Stream {
    let mut s = derive_seed(seed, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

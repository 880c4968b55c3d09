//! Deterministic RNG substreams.
//!
//! Every random draw in the crate comes from a stream keyed by
//! `(master seed, purpose, indices)`, so results do not depend on the order in
//! which trials or attempts are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Graph = 0x4752_4150_4800_0001,
    ConnectivityAttempt = 0x4752_4150_4800_0002,
    Coupling = 0x4752_4150_4800_0003,
    Synthetic = 0x5553_5441_5400_0001,
    Diagnostics = 0x5553_5441_5400_0002,
    Trial = 0x4841_524e_4500_0001,
    SelfTest = 0x4841_524e_4500_0002,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a 64-bit key for `(master, purpose, indices)`.
pub fn derive_seed(master: u64, purpose: Purpose, indices: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(purpose as u64));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

/// Open the stream for `(master, purpose, indices)`.
pub fn substream(master: u64, purpose: Purpose, indices: &[u64]) -> StreamRng {
    let key = derive_seed(master, purpose, indices);
    let mut seed = [0u8; 32];
    let mut state = key;
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

//! Deterministic seed expansion and random stream derivation.
//!
//! Every random stream in a run is a ChaCha8 keystream. The 64-bit ChaCha
//! seed is obtained by folding a list of labels into the run seed with
//! SplitMix64 steps (see [`derive_seed`]); the ChaCha stream id then selects
//! the hop or user inside that keyed family. ChaCha is counter based, so a
//! stream's output depends only on `(seed, stream id, position)`.
//!
//! Label layout used by the Monte Carlo harness:
//!
//! | stream                | labels                                       | stream id          |
//! |-----------------------|----------------------------------------------|--------------------|
//! | pair sequence `x0`    | `[SEQUENCE, L, beta, batch]`                 | n/a (SplitMix64)   |
//! | user bits             | `[BITS, L, beta, batch]`                     | user index         |
//! | uplink noise `n_N`    | `[NOISE, L, beta, ebn0 bits, batch]`         | 0                  |
//! | downlink noise `n_R`  | `[NOISE, L, beta, ebn0 bits, batch]`         | 1 + receiving user |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Labels separating the independent stream families.
pub mod domain {
    pub const SEQUENCE: u64 = 0x5345_5155;
    pub const BITS: u64 = 0x4249_5453;
    pub const NOISE: u64 = 0x4e4f_4953;
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One SplitMix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `labels` into `root`, one SplitMix64 step per label.
pub fn derive_seed(root: u64, labels: &[u64]) -> u64 {
    let mut state = root;
    let mut out = splitmix64(&mut state);
    for &label in labels {
        state = out ^ label.wrapping_mul(GOLDEN_GAMMA);
        out = splitmix64(&mut state);
    }
    out
}

/// ChaCha8 keystream for `seed`, positioned at the start of `stream_id`.
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Maps a 64-bit word to the open unit interval (0, 1).
pub(crate) fn open_unit(word: u64) -> f64 {
    ((word >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

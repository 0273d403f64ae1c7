//! Deterministic per-trial seed derivation.
//!
//! The derivation is part of the output contract: re-running any subset of a
//! sweep, in any parallel schedule, reproduces identical trial seeds. Each
//! field is absorbed into a splitmix64 state; the published formula is
//!
//! ```text
//! s0 = base_seed
//! for x in [n, kind_ordinal, trial]:
//!     s ^= x * 0x9E3779B97F4A7C15   (wrapping)
//!     seed = splitmix64(&mut s)
//! ```

pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trial seed from `(base_seed, n, kind ordinal, trial index)`.
pub fn derive_seed(base_seed: u64, n: u64, kind_ordinal: u64, trial: u64) -> u64 {
    let mut s = base_seed;
    let mut out = splitmix64(&mut s);
    for x in [n, kind_ordinal, trial] {
        s ^= x.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        out = splitmix64(&mut s);
    }
    out
}

//! Construction and spectral analysis of doubly stochastic Markov chains built
//! from directed cycles with a small number of random interconnection points.
//!
//! The chains studied here consist of `k` directed arcs joined end-to-start
//! through a symmetric doubly stochastic `k x k` interconnection matrix. Two
//! sampling models are provided: independent geometric arc lengths
//! ([`chain::sample_arcmod`]) and a directed `n`-cycle with `k` uniformly
//! chosen edges rewired ([`chain::sample_cyclemod`]). The quantity of interest
//! is the absolute spectral gap `min { 1 - |mu| : mu != 1 eigenvalue }`, which
//! for these non-reversible chains scales like `k/n` rather than the `k^2/n^2`
//! of the symmetrized walk.
//!
//! The crate is `no_std` (with `alloc`); all IO, plotting and experiment
//! orchestration live in the companion `cyclegap-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chain;
pub mod interconnect;
pub mod linalg;
pub mod spectral;
pub mod theory;

pub use num_complex::Complex64;

/// `ln k` clamped from below to 1.
///
/// Every `log^a k` factor in the bound formulas uses this in place of the
/// plain logarithm so that `k = 1, 2` stay well defined; for `k >= 3` the two
/// agree.
pub fn ln_plus(k: usize) -> f64 {
    #[allow(unused_imports)]
    use num_traits::Float;
    (k as f64).ln().max(1.0)
}

//! Experiment harness, file formats, figures and verification suites around
//! `cyclegap-core`.

pub mod experiments;
pub mod formats;
pub mod plot;
pub mod seed;
pub mod verify;

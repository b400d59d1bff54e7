//! Simulation and inference toolkit for continuous-wave squeezed light
//! generated by cascaded second-order ("up-down") self-phase modulation in
//! a traveling-wave resonator.
//!
//! The crate is organized bottom-up:
//!
//! - [`gaussian`]: quadrature noise ellipses, loss and phase-jitter channels,
//!   and the loss-only / phase-noise inverse problems.
//! - [`phase_matching`]: temperature-tuned sinc-squared conversion and its
//!   calibration from measured extrema.
//! - [`cascade`]: coupled-mode propagation through the crystal and the
//!   effective Kerr phase it produces.
//! - [`cavity`]: resonator steady states, resonance scans, and the
//!   linearized squeezing spectrum.
//! - [`detection`]: output mode-cleaner filtering, efficiency budgets, and
//!   homodyne tomography traces.

pub mod cascade;
pub mod cavity;
pub mod detection;
pub mod error;
pub mod gaussian;
pub mod numerics;
pub mod phase_matching;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

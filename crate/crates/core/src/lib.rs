//! Carrier-envelope-phase dependent interference between one-photon and
//! three-photon excitation of the F = 1 Zeeman manifold driven by a
//! bichromatic Gaussian rf pulse.
//!
//! Conventions used throughout the crate:
//! - frequencies (carriers, Zeeman splitting, Rabi frequencies, Γ) are angular, rad/s;
//! - phases are radians, times seconds, fields tesla;
//! - the spin basis is ordered (m_F = +1, 0, −1).
//!
//! Unit conversion from the experimentalist-facing config (kHz, degrees, µs,
//! µT) happens only in [`config`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod csvio;
pub mod dynamics;
pub mod error;
pub mod perturbation;
pub mod pulse;
pub mod scan;
pub mod spin;

pub use error::{Error, Result};

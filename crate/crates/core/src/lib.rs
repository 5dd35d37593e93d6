//! Oscillator phase-noise limits on self-interference (SI) cancellation in
//! full-duplex OFDM transceivers.
//!
//! The crate has two halves that are meant to be checked against each other:
//!
//! * [`analytic`] evaluates the closed-form subcarrier-wise residual SI power
//!   for free-running (Wiener) oscillators, either shared between the
//!   transmitter and receiver or independent.
//! * [`simulator`] runs a sample-level Monte-Carlo of the same link: OFDM
//!   waveform, TX phase noise, multipath coupling with antenna separation,
//!   analog cancellation of the main path, RX phase noise, digital
//!   cancellation and the receiver FFT.
//!
//! [`experiments`] wires both into parameter sweeps and CSV output.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cancellation;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod ofdm;
pub mod phasenoise;
pub mod scenario;
pub mod simulator;

pub use error::{Error, Result};

/// Complex baseband sample.
pub type Cf64 = num_complex::Complex<f64>;

/// Power ratio to decibels.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Decibels to power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

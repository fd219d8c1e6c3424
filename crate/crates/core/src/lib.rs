//! Link-level Monte Carlo simulation of MIMO-OFDM transmit beamforming with
//! limited feedback.
//!
//! The receiver quantizes its channel against a random vector quantization
//! (RVQ) codebook and feeds back only the index; the transmitter beamforms
//! each subcarrier with the indicated codebook entry. Bit error rates are
//! compared against the unquantized optimum (dominant right singular vector
//! of each subcarrier channel).
//!
//! Modules, bottom up:
//! - [`numerics`]: small dense complex matrices, inversion, dominant eigenvector.
//! - [`channel`]: Rayleigh taps, per-subcarrier responses, LS estimation.
//! - [`codebook`]: RVQ codebooks and the quantization/selection rules.
//! - [`beamforming`]: MRC, power allocation, zero-forcing precoding, SINR.
//! - [`simulator`]: seeded, parallel BER sweeps.
//! - [`cli`]: presets, config files, CSV/manifest output.

pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod codebook;
pub mod error;
pub mod numerics;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};

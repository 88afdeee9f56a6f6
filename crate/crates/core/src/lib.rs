//! Analysis toolkit for ultra-low-noise microwave amplifiers.
//!
//! The crate covers the quantised small-signal circuit model and its
//! transconductance fluctuations, classical two-port analysis (Touchstone
//! I/O, stability, mismatch noise figure, nodal S-parameters), polynomial
//! intermodulation, a baseband SNR pipeline for measuring noise figure, and
//! source-match optimisation.

pub mod circuit;
pub mod error;
pub mod fluctuation;
mod linalg;
pub mod matching;
pub mod nonlinear;
pub mod rf;
pub mod snr;

pub use error::{Error, Result};

//! Pulse trains from phase-modulated light passing a resonant absorber.

pub mod bessel;
pub mod comb;
pub mod cumulative;
pub mod dispersive;
pub mod error;
pub mod filterbank;
pub mod metrics;
pub mod quadrature;
pub mod starkcell;
pub mod synthesis;

pub use error::{Error, Result};

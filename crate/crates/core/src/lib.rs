//! Desk-scale simulation and reconstruction for pulsed homodyne tomography
//! of Fock states.
//!
//! The crate covers the whole numerical chain: Fock-basis states and their
//! quadrature marginals, the photon-loss channel, preparation-purity and
//! efficiency-budget scalars, Monte Carlo synthesis of digitizer frames,
//! pulse-area extraction and vacuum calibration, and three reconstruction
//! routes (efficiency fit, pattern-function density-matrix estimation with
//! Wigner synthesis, direct Abel inversion) plus a maximum-likelihood
//! alternative.
//!
//! Everything here is `no_std` (with `alloc`); file formats, configuration,
//! and the command-line pipeline live in the companion `focktomo` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod acquisition;
pub mod budget;
pub mod error;
pub mod grid;
pub mod ingest;
pub mod reconstruct;
pub mod rng;
pub mod state;
pub mod stats;

pub use error::{Error, Result};

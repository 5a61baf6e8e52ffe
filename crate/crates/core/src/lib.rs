//! Atoms bouncing on an intensity-modulated evanescent-wave mirror.
//!
//! The reflected de Broglie wave picks up energy sidebands `E_i + n ħω`. This
//! crate computes their weights and phases three ways and combines them into a
//! three-bounce interferometer:
//!
//! * [`born`]: first-order transition probabilities between mirror eigenstates;
//! * [`semiclassical`]: phase modulation along the classical bounce, giving
//!   Bessel-function sideband amplitudes;
//! * [`tdse`]: split-step integration of the Schrödinger equation for a
//!   Gaussian wavepacket (RK4 on a 6th-order difference Laplacian), with
//!   momentum-spectrum extraction;
//! * [`mirror`]: the potential itself and a classical bounce integrator used as
//!   an independent check on the energy-transfer law;
//! * [`interferometer`]: output-channel amplitudes, fringe amplitude and its
//!   optimization.
//!
//! Everything internal is expressed in units where `ħ = M = κ = 1`; see
//! [`units`] for conversion to SI for a concrete atom.

pub mod born;
pub mod cli;
pub mod error;
pub mod interferometer;
pub mod mirror;
pub mod semiclassical;
pub mod tdse;
pub mod units;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

//! Verification and simulation toolkit for differential-phase-shift QKD
//! with imperfect Mach-Zehnder interferometers.
//!
//! The measurement unit's beam splitters are only assumed to have
//! transmittances inside known ranges around 50%. This crate implements the
//! resulting security analysis end to end:
//!
//! * [`operators`] builds the detection, bit-error and phase-error POVMs and
//!   the auxiliary matrices of the proof, and certifies operator
//!   inequalities by eigenvalue bounds.
//! * [`bounds`] computes the amplification coefficient, the phase-error
//!   upper bound, key rates, Poisson source tails, and the privacy
//!   amplification for both detector backends.
//! * [`fock_sim`] cross-checks the operator layer against a truncated
//!   Fock-space simulation of the actual interferometer.
//! * [`protocol_sim`] runs the full protocol as a Monte-Carlo experiment
//!   over coherent pulse blocks.
//!
//! The numeric core is generic over the scalar type ([`scalar::Real`],
//! either `f32` or `f64`); the aliases below fix the `f64` instantiation
//! that the command-line tools and the Monte-Carlo layer use.

pub mod bounds;
pub mod error;
pub mod fock_sim;
pub mod linalg;
pub mod operators;
pub mod protocol_sim;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar of the default `f64` instantiation.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix over `f64`.
pub type Matrix = linalg::CMatrix<f64>;
/// Certified Hermitian operator over `f64`.
pub type Hermitian = operators::HermitianOperator<f64>;
/// Beam-splitter configuration over `f64`.
pub type BsConfig64 = operators::BsConfig<f64>;
/// Source model over `f64`.
pub type SourceModel64 = bounds::SourceModel<f64>;
/// Key-rate result over `f64`.
pub type KeyRateResult64 = bounds::KeyRateResult<f64>;
/// Pure Fock state over `f64`.
pub type FockState64 = fock_sim::FockState<f64>;
/// Density operator over `f64`.
pub type DensityOperator64 = fock_sim::DensityOperator<f64>;

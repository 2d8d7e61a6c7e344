//! Truncated Fock-space simulator for the k-photon driven-damped oscillator
//! Lindblad equation with dissipator L = a^k − α^k I.
//!
//! The numerical core is generic over the real scalar ([`Real`], implemented
//! for `f32` and `f64`); the `f64` aliases below are what the CLI uses.

pub mod cli_io;
pub mod error;
pub mod evolve;
pub mod fock;
pub mod invariants;
pub mod lindblad;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use fock::{FockConfig, StateVector};
pub use lindblad::{DensityMatrix, Lindbladian};
pub use scalar::{Real, C};

/// Double-precision complex matrix.
pub type Matrix = numerics::ComplexMatrix<f64>;
/// Double-precision pure state.
pub type State = fock::StateVector<f64>;
/// Double-precision generator.
pub type Model = lindblad::Lindbladian<f64>;
/// Double-precision validated density matrix.
pub type Density = lindblad::DensityMatrix<f64>;

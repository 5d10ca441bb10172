//! Open-system dynamics of two remote qubits in a fiber-coupled two-cavity
//! QED network, plus the correlation measures and transition analysis used
//! to study sudden changes and freezing of discord under thermal reservoirs.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`basis`] enumerates the truncated product basis `|A1 A2 C1 C2 F>`.
//! 2. [`dressing`] builds the RWA Hamiltonian and diagonalizes it per
//!    excitation manifold into dressed states.
//! 3. [`rates`] turns the dressed spectrum into thermal transition rates.
//! 4. [`evolution`] propagates the dressed density matrix.
//! 5. [`state_io`] prepares Bell-diagonal inputs and extracts the two-qubit
//!    X state by projecting the fields on vacuum.
//! 6. [`correlations`] evaluates MI, CC, QD, Bures GQD, REE and GE.
//! 7. [`analysis`] detects sudden changes and freezing and runs sweeps.
//!
//! [`config`] and [`pipeline`] glue everything into the end-to-end run used by
//! the `cqednet` binary.

pub mod analysis;
pub mod basis;
pub mod config;
pub mod correlations;
pub mod dressing;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod output;
pub mod pipeline;
pub mod rates;
pub mod state_io;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Largest entry modulus of a complex matrix.
pub fn max_modulus<'a>(m: impl IntoIterator<Item = &'a C64>) -> f64 {
    m.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

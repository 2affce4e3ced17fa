//! Bound states of the radial Schrödinger equation with power-law
//! potentials `V(r) = α r^k`, built from the Airy-summed uniform WKB
//! log-derivative.
//!
//! The pipeline for one level is
//!
//! ```text
//! PowerLawProblem --solve_level--> Eigenstate --> wave function samples
//!                                        \-----> diagnostics (⟨H⟩, √⟨H²⟩, d, v, δe)
//! ```
//!
//! Everything works in dimensionless units (ħ = 1, 2m = 1, α = 1), where the
//! Hamiltonian is `-d²/dx² + x^k + l(l+1)/x²`.

pub mod airy;
pub mod diagnostics;
mod error;
pub mod logderiv;
pub mod numerics;
pub mod oracle;
pub mod problem;
pub mod spectrum;
pub mod wavefunction;

pub use diagnostics::{table1_row, DiagnosticsRecord, ReferenceRow};
pub use error::{Error, Result};
pub use problem::{choose_s, PhysicalSpec, PowerLawProblem};
pub use spectrum::{solve_level, Eigenstate};
pub use wavefunction::{WaveFunction, WaveSample};




//! Simulation library for few-qubit ultrastrong-coupling circuit QED.
//!
//! The crate covers the whole chain from raw circuit elements to phase
//! diagrams:
//!
//! - [`circuit`]: element values → effective capacitances/inductances,
//!   resonator frequency, fluxonium qubit splitting and couplings.
//! - [`operators`] and [`models`]: truncated Fock ⊗ spin operators and the
//!   one-, multi- and collective-qubit Hamiltonians.
//! - [`effective`]: closed-form low-energy theories (Bogoliubov spectrum,
//!   superradiant displacement, two-qubit fermionic levels, N-qubit gap).
//! - [`swt`]: a numerical Schrieffer–Wolff engine used as an independent
//!   check of every closed form.
//! - [`scan`]: exact-diagonalization driver, grid scans and transition
//!   detection.
//! - [`verify`]: named invariant and acceptance checks, shared by the CLI and
//!   the acceptance test suite.
//!
//! Energies are in units of the resonator frequency unless stated.

pub mod circuit;
pub mod effective;
pub mod error;
pub mod models;
pub mod numerics;
pub mod operators;
pub mod scan;
pub mod swt;
pub mod verify;

pub use error::{Error, ErrorKind, Module, Result};
pub use numerics::{C64, ComplexMatrix, EigDecomposition};
pub use operators::HalfInt;
pub use models::{FrameSpec, ModelParams};
pub use effective::{Couplings, PhaseLabel, QuadraticBosonForm};
pub use scan::{GridRow, GridSpec, ModelKind, SpectrumResult, TransitionReport};

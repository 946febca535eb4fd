//! Spectra, symmetry algebra, effective Hamiltonians and semiclassical
//! formulas for a particle on a ring and the 0-π superconducting circuit.
//!
//! Energies carry whatever unit the caller picks. Composite bases are
//! ordered Fock(φ) ⊗ [Fock(ξ) ⊗] charge(θ) with row-major indexing.

pub mod circuit;
pub mod error;
pub mod quad;
pub mod ring;
pub mod semiclassics;
pub mod special;
pub mod spectral;
pub mod sw;
pub mod symmetry;

pub use error::{Error, Result};
pub use spectral::{HermitianOperator, Spectrum, C64};

/// Library version recorded in CLI provenance files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

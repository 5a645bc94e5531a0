//! Nuclear cusp identities and derivative bounds for the spherically
//! averaged one-electron density of explicit atomic wavefunctions.
//!
//! The Hamiltonian convention throughout is
//! `H = -Δ - Σ Z/|x_i| + Σ 1/|x_i - x_j|` (no factor ½), so hydrogenic
//! states decay like `e^{-Zr/(2n)}` with energies `-Z²/(4n²)`.

pub mod cli;
pub mod cusp_report;
pub mod density;
pub mod error;
pub mod extrapolate;
pub mod hfunction;
pub mod jastrow;
pub mod marginal;
pub mod quadrature;
pub mod wavefunction;

pub use error::{CuspError, Result};

//! Explicit few-electron wavefunction models, their gradients and the
//! nucleus-regularized factors `φ_j = e^{(Z/2)|x_j|}ψ`.

pub mod atom;
pub mod harmonics;
pub mod hylleraas;
pub mod model;
pub mod orbital;

pub use atom::{AtomSpec, Configuration};
pub use hylleraas::{Hylleraas, HylleraasTerm};
pub use model::{Variant, WavefunctionModel};
pub use orbital::{OrbitalSpec, RadialOrbital};

use crate::error::{CuspError, Result};

/// `E_n = -Z²/(4n²)` for `H = -Δ - Z/r`.
pub fn hydrogenic_energy(n: u32, charge: f64) -> Result<f64> {
    if n == 0 {
        return Err(CuspError::Domain("principal quantum number must be ≥ 1".into()));
    }
    Ok(-charge * charge / (4.0 * (n * n) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energies() {
        assert_eq!(hydrogenic_energy(1, 1.0).unwrap(), -0.25);
        assert_eq!(hydrogenic_energy(2, 1.0).unwrap(), -0.0625);
        assert_eq!(hydrogenic_energy(1, 2.0).unwrap(), -1.0);
        assert!(matches!(hydrogenic_energy(0, 1.0), Err(CuspError::Domain(_))));
    }
}

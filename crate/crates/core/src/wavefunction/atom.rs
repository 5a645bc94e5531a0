use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{CuspError, Result};

/// Electron count, nuclear charge and energies of an atomic system with
/// Hamiltonian `H = -Δ - Σ Z/|x_i| + Σ 1/|x_i - x_j|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub n_electrons: usize,
    pub charge: f64,
    pub energy: f64,
    /// Ground energy of the system with one electron removed (0 for `N = 1`).
    pub prev_ground_energy: f64,
    /// `prev_ground_energy - energy`.
    pub ion_gap: f64,
}

impl AtomSpec {
    pub fn new(n_electrons: usize, charge: f64, energy: f64, prev_ground_energy: f64) -> Result<Self> {
        if n_electrons == 0 {
            return Err(CuspError::Domain("at least one electron is required".into()));
        }
        if !(charge > 0.0) || !charge.is_finite() {
            return Err(CuspError::Domain(format!(
                "nuclear charge must be positive, got {charge}"
            )));
        }
        if !energy.is_finite() || !prev_ground_energy.is_finite() {
            return Err(CuspError::Domain("energies must be finite".into()));
        }
        Ok(AtomSpec {
            n_electrons,
            charge,
            energy,
            prev_ground_energy,
            ion_gap: prev_ground_energy - energy,
        })
    }

    /// One electron in the `n`-th shell: `E = -Z²/(4n²)` and an empty
    /// previous system.
    pub fn hydrogenic(n: u32, charge: f64) -> Result<Self> {
        AtomSpec::new(1, charge, super::hydrogenic_energy(n, charge)?, 0.0)
    }
}

/// Positions of all electrons.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub coords: Vec<Vector3<f64>>,
}

impl Configuration {
    pub fn new(coords: Vec<Vector3<f64>>) -> Self {
        Configuration { coords }
    }

    /// Builds a configuration from a flat `3N` slice.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(3) {
            return Err(CuspError::Domain(format!(
                "flat coordinate length {} is not a multiple of 3",
                flat.len()
            )));
        }
        Ok(Configuration {
            coords: flat
                .chunks_exact(3)
                .map(|c| Vector3::new(c[0], c[1], c[2]))
                .collect(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
    }

    /// Places `x` in slot `j` and the hat coordinates, in order, in the others.
    pub fn assemble(j: usize, x: &Vector3<f64>, hat: &[Vector3<f64>]) -> Self {
        let mut coords = Vec::with_capacity(hat.len() + 1);
        coords.extend_from_slice(&hat[..j.min(hat.len())]);
        coords.push(*x);
        if j < hat.len() {
            coords.extend_from_slice(&hat[j..]);
        }
        Configuration { coords }
    }

    pub fn n_electrons(&self) -> usize {
        self.coords.len()
    }

    pub fn dim(&self) -> usize {
        3 * self.coords.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ion_gap_is_difference() {
        let s = AtomSpec::new(2, 2.0, -1.375, -1.0).unwrap();
        assert_eq!(s.ion_gap, -1.0 - (-1.375));
        let h = AtomSpec::hydrogenic(1, 1.0).unwrap();
        assert_eq!(h.ion_gap, 0.25);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(AtomSpec::new(0, 1.0, 0.0, 0.0).is_err());
        assert!(AtomSpec::new(1, 0.0, 0.0, 0.0).is_err());
        assert!(AtomSpec::new(1, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn assemble_inserts_slot() {
        let a = Vector3::new(1.0, 0.0, 0.0);
        let b = Vector3::new(2.0, 0.0, 0.0);
        let x = Vector3::new(9.0, 0.0, 0.0);
        let c = Configuration::assemble(1, &x, &[a, b]);
        assert_eq!(c.coords, vec![a, x, b]);
        let c = Configuration::assemble(2, &x, &[a, b]);
        assert_eq!(c.coords, vec![a, b, x]);
        assert_eq!(Configuration::assemble(0, &x, &[]).coords, vec![x]);
        assert_eq!(c.dim(), 9);
    }
}

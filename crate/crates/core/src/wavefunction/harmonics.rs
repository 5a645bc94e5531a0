//! Real solid harmonics `r^l·Y_lm` as homogeneous Cartesian polynomials.
//!
//! Normalization is not applied here; orbitals compute their own constants.

use nalgebra::{Matrix3, Vector3};

use crate::error::{CuspError, Result};

/// A homogeneous polynomial `Σ c·x^a y^b z^c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidHarmonic {
    pub l: u32,
    pub m: i32,
    terms: Vec<(f64, [u32; 3])>,
}

impl SolidHarmonic {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        let t: Vec<(f64, [u32; 3])> = match (l, m) {
            (0, 0) => vec![(1.0, [0, 0, 0])],
            (1, -1) => vec![(1.0, [0, 1, 0])],
            (1, 0) => vec![(1.0, [0, 0, 1])],
            (1, 1) => vec![(1.0, [1, 0, 0])],
            (2, -2) => vec![(1.0, [1, 1, 0])],
            (2, -1) => vec![(1.0, [0, 1, 1])],
            (2, 0) => vec![(2.0, [0, 0, 2]), (-1.0, [2, 0, 0]), (-1.0, [0, 2, 0])],
            (2, 1) => vec![(1.0, [1, 0, 1])],
            (2, 2) => vec![(1.0, [2, 0, 0]), (-1.0, [0, 2, 0])],
            (3, -3) => vec![(3.0, [2, 1, 0]), (-1.0, [0, 3, 0])],
            (3, -2) => vec![(1.0, [1, 1, 1])],
            (3, -1) => vec![(4.0, [0, 1, 2]), (-1.0, [2, 1, 0]), (-1.0, [0, 3, 0])],
            (3, 0) => vec![(2.0, [0, 0, 3]), (-3.0, [2, 0, 1]), (-3.0, [0, 2, 1])],
            (3, 1) => vec![(4.0, [1, 0, 2]), (-1.0, [3, 0, 0]), (-1.0, [1, 2, 0])],
            (3, 2) => vec![(1.0, [2, 0, 1]), (-1.0, [0, 2, 1])],
            (3, 3) => vec![(1.0, [3, 0, 0]), (-3.0, [1, 2, 0])],
            _ => {
                return Err(CuspError::UnsupportedModel(format!(
                    "angular momentum (l = {l}, m = {m}) outside l ≤ 3, |m| ≤ l"
                )))
            }
        };
        Ok(SolidHarmonic { l, m, terms: t })
    }

    pub fn value(&self, x: &Vector3<f64>) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| c * monomial(x, *p))
            .sum()
    }

    pub fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let mut g = Vector3::zeros();
        for (c, p) in &self.terms {
            for k in 0..3 {
                if p[k] > 0 {
                    let mut q = *p;
                    q[k] -= 1;
                    g[k] += c * p[k] as f64 * monomial(x, q);
                }
            }
        }
        g
    }

    pub fn hessian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let mut h = Matrix3::zeros();
        for (c, p) in &self.terms {
            for a in 0..3 {
                for b in 0..3 {
                    let mut q = *p;
                    let mut f = *c;
                    if q[a] == 0 {
                        continue;
                    }
                    f *= q[a] as f64;
                    q[a] -= 1;
                    if q[b] == 0 {
                        continue;
                    }
                    f *= q[b] as f64;
                    q[b] -= 1;
                    h[(a, b)] += f * monomial(x, q);
                }
            }
        }
        h
    }
}

fn monomial(x: &Vector3<f64>, p: [u32; 3]) -> f64 {
    x.x.powi(p[0] as i32) * x.y.powi(p[1] as i32) * x.z.powi(p[2] as i32)
}

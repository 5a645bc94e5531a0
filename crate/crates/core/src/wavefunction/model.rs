use nalgebra::{DMatrix, Vector3};

use super::atom::Configuration;
use super::hylleraas::Hylleraas;
use super::orbital::RadialOrbital;
use crate::error::{CuspError, Result};
use crate::quadrature::estimate::{IntegralEstimate, Method};
use crate::quadrature::monte_carlo::{summarize, McSampler};

/// The functional form of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// One-electron eigenstate of `-Δ - Z/r`.
    Hydrogenic {
        n: u32,
        l: u32,
        m: i32,
        orbital: RadialOrbital,
    },
    /// `Π_k o_k(x_k)`, electron `k` in orbital `k`.
    OrbitalProduct(Vec<RadialOrbital>),
    HylleraasHelium(Hylleraas),
}

/// An explicit N-electron wavefunction `ψ = norm_constant·ψ_raw`.
///
/// Models are immutable; every evaluation is a pure function of its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionModel {
    pub variant: Variant,
    charge: f64,
    norm_constant: f64,
}

impl WavefunctionModel {
    /// Unnormalized model with an explicit constant.
    pub fn from_variant(variant: Variant, charge: f64, norm_constant: f64) -> Result<Self> {
        if !(charge > 0.0) {
            return Err(CuspError::Domain(format!(
                "nuclear charge must be positive, got {charge}"
            )));
        }
        if let Variant::OrbitalProduct(o) = &variant {
            if o.is_empty() {
                return Err(CuspError::UnsupportedModel(
                    "orbital product needs at least one orbital".into(),
                ));
            }
        }
        Ok(WavefunctionModel {
            variant,
            charge,
            norm_constant,
        })
    }

    pub fn hydrogenic(n: u32, l: u32, m: i32, charge: f64) -> Result<Self> {
        let orbital = RadialOrbital::hydrogenic(n, l, m, charge)?;
        WavefunctionModel::from_variant(Variant::Hydrogenic { n, l, m, orbital }, charge, 1.0)?
            .normalize()
    }

    pub fn orbital_product(orbitals: Vec<RadialOrbital>, charge: f64) -> Result<Self> {
        WavefunctionModel::from_variant(Variant::OrbitalProduct(orbitals), charge, 1.0)?.normalize()
    }

    pub fn hylleraas_helium(params: Hylleraas, charge: f64) -> Result<Self> {
        WavefunctionModel::from_variant(Variant::HylleraasHelium(params), charge, 1.0)?.normalize()
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn n_electrons(&self) -> usize {
        match &self.variant {
            Variant::Hydrogenic { .. } => 1,
            Variant::OrbitalProduct(o) => o.len(),
            Variant::HylleraasHelium(_) => 2,
        }
    }

    /// Only hydrogenic states are exact eigenfunctions.
    pub fn is_eigenfunction(&self) -> bool {
        matches!(self.variant, Variant::Hydrogenic { .. })
    }

    pub fn label(&self) -> String {
        match &self.variant {
            Variant::Hydrogenic { n, l, m, .. } => format!("hydrogenic(n={n}, l={l}, m={m})"),
            Variant::OrbitalProduct(o) => format!("orbital-product({} orbitals)", o.len()),
            Variant::HylleraasHelium(h) => format!("hylleraas({} terms)", h.terms.len()),
        }
    }

    /// True when every electron slot has zero angular momentum.
    pub fn is_s_type(&self) -> bool {
        match &self.variant {
            Variant::Hydrogenic { l, .. } => *l == 0,
            Variant::OrbitalProduct(o) => o.iter().all(|o| o.l() == 0),
            Variant::HylleraasHelium(_) => true,
        }
    }

    /// Slowest amplitude decay rate over the slots; sets envelopes and truncation.
    pub fn slowest_decay(&self) -> f64 {
        match &self.variant {
            Variant::Hydrogenic { orbital, .. } => orbital.decay,
            Variant::OrbitalProduct(o) => o.iter().map(|o| o.decay).fold(f64::INFINITY, f64::min),
            Variant::HylleraasHelium(h) => h.alpha,
        }
    }

    /// Same model times `factor`; zero is allowed.
    pub fn scaled(&self, factor: f64) -> Self {
        WavefunctionModel {
            variant: self.variant.clone(),
            charge: self.charge,
            norm_constant: self.norm_constant * factor,
        }
    }

    /// `∫|ψ_raw|²`, evaluated by closed-form radial moments (orbitals) or a
    /// deterministic product grid in `(s, t, u)` (Hylleraas).
    pub fn raw_norm_squared(&self) -> f64 {
        match &self.variant {
            Variant::Hydrogenic { orbital, .. } => orbital.norm_squared(),
            Variant::OrbitalProduct(o) => o.iter().map(|o| o.norm_squared()).product(),
            Variant::HylleraasHelium(h) => h.norm_squared(),
        }
    }

    /// Rescales so that `∫|ψ|² = 1`.
    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.raw_norm_squared();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(CuspError::integration(
                "normalization",
                format!("norm integral evaluated to {n2}"),
            ));
        }
        Ok(WavefunctionModel {
            variant: self.variant.clone(),
            charge: self.charge,
            norm_constant: 1.0 / n2.sqrt(),
        })
    }

    /// `∫|ψ|²` by importance sampling all electrons; a cross-check on [`normalize`].
    ///
    /// [`normalize`]: WavefunctionModel::normalize
    pub fn monte_carlo_norm(&self, sampler: &McSampler) -> Result<IntegralEstimate> {
        let draws = sampler.draw(self.n_electrons())?;
        let mut ratios = Vec::with_capacity(draws.points.len());
        for (pts, p) in draws.points.iter().zip(&draws.density) {
            let v = self.eval_psi(&Configuration::new(pts.clone()))?;
            ratios.push(v * v / p);
        }
        let st = summarize(&ratios, draws.batches);
        Ok(IntegralEstimate::new(
            st.mean,
            st.standard_error,
            Method::MonteCarlo,
            ratios.len(),
        ))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.n_electrons() {
            return Err(CuspError::DimensionMismatch {
                expected: self.n_electrons(),
                got: n,
            });
        }
        Ok(())
    }

    /// `e^{(Z/2)|x_j|}ψ` at a full configuration.
    fn regularized(&self, j: usize, c: &Configuration) -> f64 {
        let half_z = 0.5 * self.charge;
        let raw = match &self.variant {
            Variant::Hydrogenic { orbital, .. } => orbital.value_shifted(&c.coords[0], half_z),
            Variant::OrbitalProduct(o) => o
                .iter()
                .zip(&c.coords)
                .enumerate()
                .map(|(k, (o, x))| o.value_shifted(x, if k == j { half_z } else { 0.0 }))
                .product(),
            Variant::HylleraasHelium(h) => h.value_shifted(&c.coords[0], &c.coords[1], j, half_z),
        };
        self.norm_constant * raw
    }

    pub fn eval_psi(&self, c: &Configuration) -> Result<f64> {
        self.check_dim(c.n_electrons())?;
        let x = &c.coords[0];
        Ok(self.regularized(0, c) * (-0.5 * self.charge * x.norm()).exp())
    }

    /// Gradients in the slots flagged by `want`; unflagged slots are zero and
    /// may sit on singular points.
    pub fn grad_slots(&self, c: &Configuration, want: &[bool]) -> Result<Vec<Vector3<f64>>> {
        self.check_dim(c.n_electrons())?;
        let n = c.n_electrons();
        let mut out = vec![Vector3::zeros(); n];
        match &self.variant {
            Variant::Hydrogenic { orbital, .. } => {
                if want[0] {
                    out[0] = orbital.gradient(&c.coords[0])? * self.norm_constant;
                }
            }
            Variant::OrbitalProduct(o) => {
                let vals: Vec<f64> = o.iter().zip(&c.coords).map(|(o, x)| o.value(x)).collect();
                for k in 0..n {
                    if !want[k] {
                        continue;
                    }
                    let others: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != k)
                        .map(|(_, v)| v)
                        .product();
                    out[k] = o[k].gradient(&c.coords[k])? * (self.norm_constant * others);
                }
            }
            Variant::HylleraasHelium(h) => {
                let g = h.gradient_shifted(&c.coords[0], &c.coords[1], 0, 0.0, [want[0], want[1]])?;
                out[0] = g[0] * self.norm_constant;
                out[1] = g[1] * self.norm_constant;
            }
        }
        Ok(out)
    }

    /// Full gradient on `R^{3N}`, one 3-vector per electron.
    pub fn eval_grad_psi(&self, c: &Configuration) -> Result<Vec<Vector3<f64>>> {
        self.grad_slots(c, &vec![true; c.n_electrons()])
    }

    /// Regularized factor `φ_j = e^{(Z/2)|x|}ψ(x, hat)`.
    pub fn eval_phi(&self, j: usize, x: &Vector3<f64>, hat: &[Vector3<f64>]) -> Result<f64> {
        self.check_dim(hat.len() + 1)?;
        self.check_slot(j)?;
        Ok(self.regularized(j, &Configuration::assemble(j, x, hat)))
    }

    fn check_slot(&self, j: usize) -> Result<()> {
        if j >= self.n_electrons() {
            return Err(CuspError::Domain(format!(
                "electron index {j} out of range for {} electrons",
                self.n_electrons()
            )));
        }
        Ok(())
    }

    /// Gradient of `φ_j` in the `x` slot, including the limit at `x = 0`.
    pub fn eval_grad_phi(&self, j: usize, x: &Vector3<f64>, hat: &[Vector3<f64>]) -> Result<Vector3<f64>> {
        self.check_dim(hat.len() + 1)?;
        self.check_slot(j)?;
        let half_z = 0.5 * self.charge;
        let at_origin = x.norm() == 0.0;
        let c = Configuration::assemble(j, x, hat);
        let g = match &self.variant {
            Variant::Hydrogenic { orbital, .. } => {
                if at_origin {
                    orbital.gradient_shifted_at_origin(half_z)?
                } else {
                    orbital.gradient_shifted(x, half_z)?
                }
            }
            Variant::OrbitalProduct(o) => {
                let others: f64 = o
                    .iter()
                    .zip(&c.coords)
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, (o, y))| o.value(y))
                    .product();
                let gj = if at_origin {
                    o[j].gradient_shifted_at_origin(half_z)?
                } else {
                    o[j].gradient_shifted(x, half_z)?
                };
                gj * others
            }
            Variant::HylleraasHelium(h) => {
                if at_origin {
                    h.regularized_gradient_at_origin(&hat[0], half_z)?
                } else {
                    let mut want = [false; 2];
                    want[j] = true;
                    h.gradient_shifted(&c.coords[0], &c.coords[1], j, half_z, want)?[j]
                }
            }
        };
        Ok(g * self.norm_constant)
    }

    /// Hessian on `R^{3N}`; slot blocks are `3×3`.
    pub fn hessian(&self, c: &Configuration) -> Result<DMatrix<f64>> {
        self.check_dim(c.n_electrons())?;
        let orbitals: Vec<&RadialOrbital> = match &self.variant {
            Variant::Hydrogenic { orbital, .. } => vec![orbital],
            Variant::OrbitalProduct(o) => o.iter().collect(),
            Variant::HylleraasHelium(_) => {
                return Err(CuspError::UnsupportedModel(
                    "Hessian is implemented for orbital-based models only".into(),
                ))
            }
        };
        let n = orbitals.len();
        let vals: Vec<f64> = orbitals.iter().zip(&c.coords).map(|(o, x)| o.value(x)).collect();
        let grads: Vec<Vector3<f64>> = orbitals
            .iter()
            .zip(&c.coords)
            .map(|(o, x)| o.gradient(x))
            .collect::<Result<_>>()?;
        let rest = |skip: &[usize]| -> f64 {
            vals.iter()
                .enumerate()
                .filter(|(i, _)| !skip.contains(i))
                .map(|(_, v)| v)
                .product()
        };
        let mut h = DMatrix::zeros(3 * n, 3 * n);
        for k in 0..n {
            let block = orbitals[k].hessian(&c.coords[k])? * (self.norm_constant * rest(&[k]));
            h.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(&block);
            for l in (k + 1)..n {
                let b = grads[k] * grads[l].transpose() * (self.norm_constant * rest(&[k, l]));
                h.fixed_view_mut::<3, 3>(3 * k, 3 * l).copy_from(&b);
                h.fixed_view_mut::<3, 3>(3 * l, 3 * k).copy_from(&b.transpose());
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ground_state_examples() {
        let m = WavefunctionModel::hydrogenic(1, 0, 0, 1.0).unwrap();
        let origin = Configuration::new(vec![Vector3::zeros()]);
        let psi0 = m.eval_psi(&origin).unwrap();
        assert!((psi0 - (1.0 / (8.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((psi0 - 0.19947).abs() < 1e-5);
        let far = Configuration::new(vec![Vector3::new(0.0, 2.0, 0.0)]);
        assert!((m.eval_psi(&far).unwrap() - psi0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(m.scaled(0.0).eval_psi(&far).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let m = WavefunctionModel::hydrogenic(1, 0, 0, 1.0).unwrap();
        let c = Configuration::new(vec![Vector3::zeros(); 2]);
        assert!(matches!(
            m.eval_psi(&c),
            Err(CuspError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn normalization_constants() {
        for z in [1.0, 2.0] {
            let m = WavefunctionModel::hydrogenic(1, 0, 0, z).unwrap();
            let want = z * z * z / (8.0 * PI);
            assert!((m.norm_constant().powi(2) / want - 1.0).abs() < 1e-12);
        }
        let z = 2.0;
        let o = RadialOrbital::hydrogenic(1, 0, 0, z).unwrap();
        let he = WavefunctionModel::orbital_product(vec![o.clone(), o], z).unwrap();
        let want = (z * z * z / (8.0 * PI)).powi(2);
        assert!((he.norm_constant().powi(2) / want - 1.0).abs() < 1e-12);
        let again = he.normalize().unwrap();
        assert!((again.norm_constant() - he.norm_constant()).abs() <= 1e-12 * he.norm_constant());
    }

    #[test]
    fn phi_examples() {
        let m = WavefunctionModel::hydrogenic(1, 0, 0, 1.0).unwrap();
        for x in [Vector3::zeros(), Vector3::new(0.3, 0.1, 2.0)] {
            assert!((m.eval_phi(0, &x, &[]).unwrap() - m.norm_constant()).abs() < 1e-16);
            assert_eq!(m.eval_grad_phi(0, &x, &[]).unwrap().norm(), 0.0);
        }
        let m2 = WavefunctionModel::hydrogenic(2, 0, 0, 1.0).unwrap();
        let p0 = m2.eval_phi(0, &Vector3::zeros(), &[]).unwrap();
        assert!((p0 - 2.0 * m2.norm_constant()).abs() < 1e-16);
        assert_eq!(m2.eval_grad_phi(0, &Vector3::zeros(), &[]).unwrap(), Vector3::zeros());
    }

    #[test]
    fn product_grad_phi_at_origin_vanishes() {
        let z = 2.0;
        let o = RadialOrbital::hydrogenic(1, 0, 0, z).unwrap();
        let he = WavefunctionModel::orbital_product(vec![o.clone(), o], z).unwrap();
        let hat = [Vector3::new(0.4, -0.3, 0.2)];
        assert_eq!(he.eval_grad_phi(0, &Vector3::zeros(), &hat).unwrap(), Vector3::zeros());
        assert_eq!(he.eval_grad_phi(1, &Vector3::zeros(), &hat).unwrap(), Vector3::zeros());
    }

    #[test]
    fn hydrogen_gradient_example() {
        let z = 1.4;
        let m = WavefunctionModel::hydrogenic(1, 0, 0, z).unwrap();
        let x = Vector3::new(0.2, -0.5, 0.9);
        let c = Configuration::new(vec![x]);
        let g = m.eval_grad_psi(&c).unwrap()[0];
        let want = -x / x.norm() * (0.5 * z * m.eval_psi(&c).unwrap());
        assert!((g - want).norm() < 1e-15);
        assert!(matches!(
            m.eval_grad_psi(&Configuration::new(vec![Vector3::zeros()])),
            Err(CuspError::SingularPoint(_))
        ));
    }
}

//! One-electron orbitals `p(r)·e^{-a r}·S_lm(x)` with `S_lm` a solid harmonic.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::harmonics::SolidHarmonic;
use crate::error::{CuspError, Result};

/// Serializable description of an orbital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalSpec {
    /// Amplitude decay rate `a` in `e^{-a r}`.
    pub decay: f64,
    /// Coefficients of the radial polynomial in ascending powers of `r`.
    #[serde(default = "unit_poly")]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub m: i32,
}

fn unit_poly() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialOrbital {
    pub poly: Vec<f64>,
    pub decay: f64,
    pub harmonic: SolidHarmonic,
}

impl RadialOrbital {
    pub fn new(poly: Vec<f64>, decay: f64, l: u32, m: i32) -> Result<Self> {
        if !(decay > 0.0) || !decay.is_finite() {
            return Err(CuspError::UnsupportedModel(format!(
                "orbital decay rate must be positive and finite, got {decay}"
            )));
        }
        if poly.is_empty() || poly.iter().any(|c| !c.is_finite()) {
            return Err(CuspError::UnsupportedModel(
                "orbital polynomial must have at least one finite coefficient".into(),
            ));
        }
        Ok(RadialOrbital {
            poly,
            decay,
            harmonic: SolidHarmonic::new(l, m)?,
        })
    }

    pub fn from_spec(spec: &OrbitalSpec) -> Result<Self> {
        RadialOrbital::new(spec.poly.clone(), spec.decay, spec.l, spec.m)
    }

    pub fn to_spec(&self) -> OrbitalSpec {
        OrbitalSpec {
            decay: self.decay,
            poly: self.poly.clone(),
            l: self.harmonic.l,
            m: self.harmonic.m,
        }
    }

    /// Hydrogenic orbital for `H = -Δ - Z/r`: the radial part is
    /// `ρ^l e^{-ρ/2} L^{(2l+1)}_{n-l-1}(ρ)` with `ρ = Z r / n`; the `ρ^l` is
    /// carried by the solid harmonic.
    pub fn hydrogenic(n: u32, l: u32, m: i32, charge: f64) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(CuspError::UnsupportedModel(format!(
                "hydrogenic states are tabulated for 1 ≤ n ≤ 4, got n = {n}"
            )));
        }
        if l >= n {
            return Err(CuspError::UnsupportedModel(format!(
                "hydrogenic state needs l < n, got n = {n}, l = {l}"
            )));
        }
        let k = n - l - 1;
        let alpha = 2 * l + 1;
        let scale = charge / n as f64;
        let poly = (0..=k)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(k + alpha, k - i) / factorial(i) * scale.powi(i as i32)
            })
            .collect();
        RadialOrbital::new(poly, charge / (2.0 * n as f64), l, m)
    }

    pub fn l(&self) -> u32 {
        self.harmonic.l
    }

    /// `(p(r), p'(r), p''(r))`.
    fn poly_eval(&self, r: f64) -> (f64, f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        let mut ddp = 0.0;
        for c in self.poly.iter().rev() {
            p = p * r + c;
        }
        for (i, c) in self.poly.iter().enumerate().skip(1).rev() {
            dp = dp * r + c * i as f64;
        }
        for (i, c) in self.poly.iter().enumerate().skip(2).rev() {
            ddp = ddp * r + c * (i * (i - 1)) as f64;
        }
        (p, dp, ddp)
    }

    /// Radial factor `f(r) = p(r)e^{-b r}` and its first two derivatives, with
    /// `b = decay - shift`.
    fn radial(&self, r: f64, shift: f64) -> (f64, f64, f64) {
        let b = self.decay - shift;
        let e = (-b * r).exp();
        let (p, dp, ddp) = self.poly_eval(r);
        (
            p * e,
            (dp - b * p) * e,
            (ddp - 2.0 * b * dp + b * b * p) * e,
        )
    }

    /// Value with the exponent reduced by `shift`.
    pub fn value_shifted(&self, x: &Vector3<f64>, shift: f64) -> f64 {
        let (f, _, _) = self.radial(x.norm(), shift);
        f * self.harmonic.value(x)
    }

    pub fn value(&self, x: &Vector3<f64>) -> f64 {
        self.value_shifted(x, 0.0)
    }

    /// Gradient with the exponent reduced by `shift`; requires `x ≠ 0`.
    pub fn gradient_shifted(&self, x: &Vector3<f64>, shift: f64) -> Result<Vector3<f64>> {
        let r = x.norm();
        if r == 0.0 {
            return Err(CuspError::SingularPoint(
                "orbital gradient requested at the nucleus".into(),
            ));
        }
        let (f, df, _) = self.radial(r, shift);
        let u = x / r;
        Ok(u * (df * self.harmonic.value(x)) + self.harmonic.gradient(x) * f)
    }

    pub fn gradient(&self, x: &Vector3<f64>) -> Result<Vector3<f64>> {
        self.gradient_shifted(x, 0.0)
    }

    /// Limit of the shifted gradient at the nucleus. Exists only when the
    /// radial derivative term cannot leave a direction-dependent remainder.
    pub fn gradient_shifted_at_origin(&self, shift: f64) -> Result<Vector3<f64>> {
        let b = self.decay - shift;
        let p0 = self.poly[0];
        let p1 = self.poly.get(1).copied().unwrap_or(0.0);
        let slope = p1 - b * p0;
        if self.l() == 0 {
            let scale = p0.abs().max(p1.abs()).max(1e-300);
            if slope.abs() > 1e-12 * scale * (1.0 + b.abs()) {
                return Err(CuspError::UnsupportedModel(format!(
                    "regularized s-orbital has radial slope {slope:.3e} at the nucleus, \
                     so its gradient there is direction dependent"
                )));
            }
            return Ok(Vector3::zeros());
        }
        Ok(self.harmonic.gradient(&Vector3::zeros()) * p0)
    }

    /// Hessian, requires `x ≠ 0`.
    pub fn hessian(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let r = x.norm();
        if r == 0.0 {
            return Err(CuspError::SingularPoint(
                "orbital Hessian requested at the nucleus".into(),
            ));
        }
        let (f, df, ddf) = self.radial(r, 0.0);
        let u = x / r;
        let s = self.harmonic.value(x);
        let gs = self.harmonic.gradient(x);
        let uu = u * u.transpose();
        let radial_part = uu * (ddf * s) + (Matrix3::identity() - uu) * (df / r * s);
        let cross = (u * gs.transpose() + gs * u.transpose()) * df;
        Ok(radial_part + cross + self.harmonic.hessian(x) * f)
    }

    /// `∫_{R³} |p(r)e^{-ar}S(x)|² dx`, from the closed-form radial moments
    /// `∫ r^k e^{-2ar} dr = k!/(2a)^{k+1}` and the angular rule.
    pub fn norm_squared(&self) -> f64 {
        let l = self.l() as usize;
        let two_a = 2.0 * self.decay;
        let mut radial = 0.0;
        for (i, ci) in self.poly.iter().enumerate() {
            for (j, cj) in self.poly.iter().enumerate() {
                let k = 2 * l + 2 + i + j;
                // k!/(2a)^{k+1} accumulated as a product to avoid overflow
                let mut term = 1.0 / two_a;
                for q in 1..=k {
                    term *= q as f64 / two_a;
                }
                radial += ci * cj * term;
            }
        }
        let rule = crate::quadrature::sphere::SphericalRule::with_degree(29).expect("shipped");
        let angular = rule.apply(|w| self.harmonic.value(w).powi(2));
        radial * angular
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ground_state_norm() {
        for z in [1.0, 2.0, 3.5] {
            let o = RadialOrbital::hydrogenic(1, 0, 0, z).unwrap();
            // ∫ e^{-Zr} 4π r² dr = 8π/Z³
            assert!((o.norm_squared() - 8.0 * PI / (z * z * z)).abs() < 1e-12 * 8.0 * PI);
        }
    }

    #[test]
    fn two_s_polynomial() {
        let o = RadialOrbital::hydrogenic(2, 0, 0, 1.0).unwrap();
        assert_eq!(o.poly, vec![2.0, -0.5]);
        assert_eq!(o.decay, 0.25);
        // the regularized 2s factor is flat at the nucleus
        assert_eq!(o.gradient_shifted_at_origin(0.5).unwrap(), Vector3::zeros());
    }

    #[test]
    fn hydrogenic_states_are_orthogonal() {
        // 1s vs 2s vs 3s radial overlap with the r² measure
        let s: Vec<RadialOrbital> = (1..=3)
            .map(|n| RadialOrbital::hydrogenic(n, 0, 0, 1.0).unwrap())
            .collect();
        let g = crate::quadrature::gauss::GaussLegendre::new(60);
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mut acc = 0.0;
                for p in 0..100 {
                    let lo = p as f64 * 2.5;
                    acc += g.integrate(lo, lo + 2.5, |r| {
                        let x = Vector3::new(0.0, 0.0, r);
                        s[i].value(&x) * s[j].value(&x) * r * r
                    });
                }
                assert!(acc.abs() < 1e-10, "{i} {j}: {acc}");
            }
        }
    }

    #[test]
    fn hydrogenic_radial_equation() {
        // -Δψ - Z/r ψ = E ψ with E = -Z²/(4n²), checked through the Hessian trace
        let z = 1.7;
        for (n, l, m) in [(1, 0, 0), (2, 0, 0), (2, 1, 1), (3, 0, 0), (3, 2, -1), (4, 3, 2)] {
            let o = RadialOrbital::hydrogenic(n, l, m, z).unwrap();
            let e = -z * z / (4.0 * (n * n) as f64);
            for x in [Vector3::new(0.3, -0.2, 0.5), Vector3::new(1.5, 2.0, -0.7)] {
                let lap = o.hessian(&x).unwrap().trace();
                let psi = o.value(&x);
                let res = -lap - z / x.norm() * psi - e * psi;
                assert!(res.abs() < 1e-11 * (1.0 + lap.abs()), "n={n} l={l}: {res}");
            }
        }
    }

    #[test]
    fn unsupported_slope_at_origin() {
        let o = RadialOrbital::new(vec![1.0], 1.3, 0, 0).unwrap();
        assert!(o.gradient_shifted_at_origin(1.0).is_err());
        assert!(o.gradient_shifted_at_origin(1.3).is_ok());
    }
}

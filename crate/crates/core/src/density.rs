//! The one-electron density `ρ`, its spherical average `ρ̃` (an integral over
//! the unit sphere, so `ρ̃(0) = 4πρ(0)`), and the radial relations that tie
//! the derivatives of `ρ̃` to `h̃`.

use std::io::Write;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{CuspError, Result};
use crate::extrapolate::{richardson_derivative, Profile, Stencil, StepLadder};
use crate::marginal::{Marginals, QuadratureSettings};
use crate::quadrature::estimate::{Ensemble, IntegralEstimate, Method};
use crate::quadrature::radial::{integrate_interval, integrate_radial, RadialTolerance};
use crate::wavefunction::{AtomSpec, WavefunctionModel};

/// `ρ(x) = Σ_j ∫|ψ(x, x̂_j)|² dx̂_j`.
pub fn density_at(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    x: &Vector3<f64>,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate> {
    let m = Marginals::new(model, spec, settings)?;
    let t = m.point_terms(x)?;
    Ok(annotate(t.rho.to_estimate(m.method(), t.stats.n_evals), &t.stats.notes()))
}

/// `ρ̃(r) = ∫_{S²} ρ(rω) dω`.
pub fn rho_tilde(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    r: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate> {
    let m = Marginals::new(model, spec, settings)?;
    let t = m.sphere_terms(r)?;
    Ok(annotate(t.rho.to_estimate(m.method(), t.stats.n_evals), &t.stats.notes()))
}

fn annotate(mut e: IntegralEstimate, notes: &[String]) -> IntegralEstimate {
    for n in notes {
        e = e.with_note(n.clone());
    }
    e
}

/// `ρ̃'(r) = (2/r²) ∫₀^r [-Z ρ̃(s) s + h̃(s) s²] ds`, with the limit
/// `-Z ρ̃(0)` at `r = 0`.
pub fn rho_tilde_prime(
    r: f64,
    charge: f64,
    rho_tilde: impl Fn(f64) -> f64,
    h_tilde: impl Fn(f64) -> f64,
) -> Result<IntegralEstimate> {
    if r == 0.0 {
        return Ok(IntegralEstimate::exact(-charge * rho_tilde(0.0)));
    }
    let inner = integrate_radial(|s| -charge * rho_tilde(s) * s + h_tilde(s) * s * s, r)?;
    Ok(inner.scale(2.0 / (r * r)))
}

/// `ρ̃''(r) = 2[h̃(r) - ∫₀¹ (Z ρ̃'(rσ) + 2 h̃(rσ)) σ² dσ]`.
pub fn rho_tilde_second(
    r: f64,
    charge: f64,
    rho_tilde_prime: impl Fn(f64) -> f64,
    h_tilde: impl Fn(f64) -> f64,
) -> Result<IntegralEstimate> {
    if !(r >= 0.0) {
        return Err(CuspError::Domain(format!("radius must be nonnegative, got {r}")));
    }
    let inner = integrate_interval(
        |s| (charge * rho_tilde_prime(r * s) + 2.0 * h_tilde(r * s)) * s * s,
        0.0,
        1.0,
        RadialTolerance::default(),
    )?;
    let v = 2.0 * (h_tilde(r) - inner.value);
    Ok(IntegralEstimate::new(v, 2.0 * inner.error, Method::Adaptive, inner.n_evals + 1))
}

/// `ρ̃^{(k+2)}(0) = 2/(k+3) [(k+1) h̃^{(k)}(0) - Z ρ̃^{(k+1)}(0)]`.
pub fn rho_tilde_kth_at_zero(k: i64, h_deriv: f64, rho_prev_deriv: f64, charge: f64) -> Result<f64> {
    if k < 0 {
        return Err(CuspError::Domain(format!("recursion order must be nonnegative, got {k}")));
    }
    let k = k as f64;
    Ok(2.0 / (k + 3.0) * ((k + 1.0) * h_deriv - charge * rho_prev_deriv))
}

/// The recursion applied component-wise to ensembles.
pub fn recursion_ensemble(k: usize, h_deriv: &Ensemble, rho_prev_deriv: &Ensemble, charge: f64) -> Ensemble {
    let k = k as f64;
    let c = 2.0 / (k + 3.0);
    Ensemble::linear(&[(c * (k + 1.0), h_deriv), (-c * charge, rho_prev_deriv)])
}

/// `ρ̃` sampled on ascending radii.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSamples {
    pub radii: Vec<f64>,
    pub values: Vec<IntegralEstimate>,
}

impl RadialSamples {
    pub fn new(radii: Vec<f64>, values: Vec<IntegralEstimate>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(CuspError::Consistency(format!(
                "{} radii but {} values",
                radii.len(),
                values.len()
            )));
        }
        if radii.iter().any(|r| !(*r >= 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CuspError::Domain(
                "radii must be nonnegative and strictly ascending".into(),
            ));
        }
        Ok(RadialSamples { radii, values })
    }

    /// Samples `ρ̃` at `radii` (sorted and deduplicated).
    pub fn sample(
        model: &WavefunctionModel,
        spec: &AtomSpec,
        radii: &[f64],
        settings: &QuadratureSettings,
    ) -> Result<Self> {
        let mut radii = radii.to_vec();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let m = Marginals::new(model, spec, settings)?;
        let profile = m.sphere_profile(&radii)?;
        let values = profile
            .iter()
            .map(|(_, t)| annotate(t.rho.to_estimate(m.method(), t.stats.n_evals), &t.stats.notes()))
            .collect();
        RadialSamples::new(radii, values)
    }

    /// CSV with columns `r, value, error, method`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| CuspError::Io(std::io::Error::other(e));
        out.write_record(["r", "value", "error", "method"]).map_err(io)?;
        for (r, v) in self.radii.iter().zip(&self.values) {
            out.write_record([
                format!("{r:e}"),
                format!("{:e}", v.value),
                format!("{:e}", v.error),
                v.method.as_str().to_string(),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Residual of the radial equation `-½(ρ̃'' + (2/r)ρ̃') - (Z/r)ρ̃ + h̃ = 0` at
/// one radius.
#[derive(Debug, Clone, Serialize)]
pub struct PdeResidual {
    pub r: f64,
    pub residual: f64,
    /// Combined error of the inputs plus a rounding allowance.
    pub error: f64,
}

/// Evaluates the radial equation at each radius with central differences
/// of `ρ̃` on a ladder of steps `min(r/8, 0.05)·2^{-m}`.
pub fn pde_residuals(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    radii: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<PdeResidual>> {
    let m = Marginals::new(model, spec, settings)?;
    let z = spec.charge;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0) {
            return Err(CuspError::Domain(format!("radial equation needs r > 0, got {r}")));
        }
        let ladder = StepLadder {
            base: (r / 8.0).min(0.05),
            levels: 5,
        };
        let abscissae = ladder.abscissae(r, Stencil::Central);
        let samples = m.sphere_profile(&abscissae)?;
        let center = samples
            .iter()
            .find(|(x, _)| *x == r)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| CuspError::Consistency("center radius missing from stencil".into()))?;
        let profile = Profile::new(samples.into_iter().map(|(x, t)| (x, t.rho)).collect());
        let d1 = richardson_derivative(&profile, r, 1, Stencil::Central, &ladder)?;
        let d2 = richardson_derivative(&profile, r, 2, Stencil::Central, &ladder)?;
        let h = center
            .h(spec.energy)
            .ok_or_else(|| CuspError::Consistency("kinetic term missing away from the nucleus".into()))?;
        let rho = &center.rho;
        let terms = [
            -0.5 * d2.estimate.value,
            -d1.estimate.value / r,
            -z / r * rho.primary(),
            h.primary(),
        ];
        let residual: f64 = terms.iter().sum();
        let rounding = 8.0 * f64::EPSILON * terms.iter().map(|t| t.abs()).sum::<f64>();
        let error = 0.5 * d2.estimate.error
            + d1.estimate.error / r
            + z / r * rho.spread_error()
            + h.spread_error()
            + rounding;
        rows.push(PdeResidual { r, residual, error });
    }
    Ok(rows)
}

/// `n` radii spaced geometrically on `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (n - 1) as f64;
            (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn hydrogen(n: u32, z: f64) -> (WavefunctionModel, AtomSpec, QuadratureSettings) {
        let m = WavefunctionModel::hydrogenic(n, 0, 0, z).unwrap();
        let s = QuadratureSettings::for_model(&m);
        (m, AtomSpec::hydrogenic(n, z).unwrap(), s)
    }

    #[test]
    fn hydrogen_density_values() {
        let (m, spec, s) = hydrogen(1, 1.0);
        let d = density_at(&m, &spec, &Vector3::zeros(), &s).unwrap();
        assert!((d.value - 1.0 / (8.0 * PI)).abs() < 1e-15);
        let r0 = rho_tilde(&m, &spec, 0.0, &s).unwrap();
        assert!((r0.value - 0.5).abs() < 1e-14);
        let r1 = rho_tilde(&m, &spec, 1.0, &s).unwrap();
        assert!((r1.value - 0.5 * (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn integral_forms_for_hydrogen() {
        let rho = |s: f64| 0.5 * (-s).exp();
        let h = |s: f64| 0.5 * rho(s);
        let p = rho_tilde_prime(1.0, 1.0, rho, h).unwrap();
        assert!((p.value + 0.5 * (-1f64).exp()).abs() < 1e-12);
        assert_eq!(rho_tilde_prime(0.0, 1.0, rho, h).unwrap().value, -0.5);
        let d = |s: f64| -rho(s);
        let s0 = rho_tilde_second(0.0, 1.0, d, h).unwrap();
        assert!((s0.value - 0.5).abs() < 1e-14);
        let s1 = rho_tilde_second(0.7, 1.0, d, h).unwrap();
        assert!((s1.value - rho(0.7)).abs() < 1e-12);
    }

    #[test]
    fn constant_profile_limits() {
        let p = rho_tilde_prime(1.0, 1.0, |_| 3.0, |_| 0.0).unwrap();
        assert!((p.value + 3.0).abs() < 1e-14);
        let s = rho_tilde_second(0.5, 1.0, |_| 0.0, |_| 0.0).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn two_s_second_derivative() {
        // 2s state, Z = 1: ρ̃(r) = c (1 - r/4)² e^{-r/2}, with the h̃ from
        // the radial equation
        let rho = |r: f64| (1.0 - r / 4.0).powi(2) * (-r / 2.0).exp();
        let (m, spec, s) = hydrogen(2, 1.0);
        let mg = Marginals::new(&m, &spec, &s).unwrap();
        let c = mg.sphere_terms(0.0).unwrap().rho.primary();
        let h0 = mg.sphere_terms(0.0).unwrap().h(spec.energy).unwrap().primary();
        assert!((h0 - 0.3125 * c).abs() < 1e-14);
        let hr = |r: f64| mg.sphere_terms(r).unwrap().h(spec.energy).unwrap().primary();
        // derivative of c·rho by hand
        let drho = |r: f64| {
            c * (-(1.0 - r / 4.0) / 2.0 - 0.5 * (1.0 - r / 4.0).powi(2)) * (-r / 2.0).exp()
        };
        let s0 = rho_tilde_second(0.0, 1.0, drho, hr).unwrap();
        assert!((s0.value / c - 0.875).abs() < 1e-12, "{}", s0.value / c);
        assert!((rho(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_examples() {
        assert!((rho_tilde_kth_at_zero(0, 0.25, -0.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((rho_tilde_kth_at_zero(1, -0.25, 0.5, 1.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(rho_tilde_kth_at_zero(3, 0.0, 0.0, 2.0).unwrap(), 0.0);
        assert!(rho_tilde_kth_at_zero(-1, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn samples_serialize_to_csv() {
        let (m, spec, s) = hydrogen(1, 1.0);
        let rs = RadialSamples::sample(&m, &spec, &[1.0, 0.0, 0.5], &s).unwrap();
        assert_eq!(rs.radii, vec![0.0, 0.5, 1.0]);
        let mut buf = Vec::new();
        rs.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,value,error,method\n"));
        assert_eq!(text.lines().count(), 4);
        assert!(RadialSamples::new(vec![1.0, 0.5], vec![IntegralEstimate::exact(0.0); 2]).is_err());
    }

    #[test]
    fn radial_equation_holds_for_hydrogen() {
        let (m, spec, s) = hydrogen(1, 1.0);
        for row in pde_residuals(&m, &spec, &log_spaced(1e-3, 10.0, 6), &s).unwrap() {
            assert!(row.residual.abs() <= 3.0 * row.error, "{row:?}");
        }
    }
}

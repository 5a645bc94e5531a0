//! The auxiliary function `h = t - v + w - Eρ` of the one-particle density
//! equation `-½Δρ - (Z/|x|)ρ + h = 0`, its spherical average, and the closed
//! expressions for `h̃(0)`, `h̃'(0)`, `t̃(0)`, `t̃'(0)` in terms of hat
//! integrals at the nucleus.

use nalgebra::Vector3;
use serde::Serialize;

use crate::cusp_report::{BoundRow, Relation};
use crate::error::{CuspError, Result};
use crate::extrapolate::{combine, richardson_derivative, Extrapolated, Profile, Stencil, StepLadder};
use crate::marginal::{Marginals, OriginTerms, QuadratureSettings, TermSet};
use crate::quadrature::estimate::{Ensemble, IntegralEstimate, Method};
use crate::wavefunction::{AtomSpec, WavefunctionModel};

/// Terms of `h_j(x)`.
#[derive(Debug, Clone, Serialize)]
pub struct HBreakdown {
    pub t: IntegralEstimate,
    pub v: IntegralEstimate,
    pub w: IntegralEstimate,
    pub e_rho: IntegralEstimate,
    /// `t - v + w - Eρ`, evaluated with the same arithmetic as the parts.
    pub total: IntegralEstimate,
}

impl HBreakdown {
    fn from_terms(t: &TermSet, energy: f64, method: Method) -> Result<Self> {
        let kin = t.kinetic().ok_or_else(|| {
            CuspError::UnsupportedModel(
                "kinetic term at the nucleus needs a regularized factor with a gradient there".into(),
            )
        })?;
        let n = t.stats.n_evals;
        let e_rho = t.rho.map(|v| energy * v);
        let h = Ensemble::linear(&[(1.0, &kin), (-1.0, &t.nuclear), (1.0, &t.repulsion), (-1.0, &e_rho)]);
        let (tv, vv, wv, ev) = (kin.primary(), t.nuclear.primary(), t.repulsion.primary(), e_rho.primary());
        let total = IntegralEstimate::new(tv - vv + wv - ev, h.spread_error(), method, n);
        Ok(HBreakdown {
            t: kin.to_estimate(method, n),
            v: t.nuclear.to_estimate(method, n),
            w: t.repulsion.to_estimate(method, n),
            e_rho: e_rho.to_estimate(method, n),
            total,
        })
    }
}

/// The terms of `h_j` at `x`. At `x = 0`, `t_j` is the angular mean of its
/// directional limits.
pub fn h_terms_at(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    j: usize,
    x: &Vector3<f64>,
    settings: &QuadratureSettings,
) -> Result<HBreakdown> {
    let m = Marginals::new(model, spec, settings)?;
    let t = m.electron_terms(j, x)?;
    HBreakdown::from_terms(&t, spec.energy, m.method())
}

/// `h̃(r) = ∫_{S²} Σ_j h_j(rω) dω`.
pub fn h_tilde(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    r: f64,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate> {
    let m = Marginals::new(model, spec, settings)?;
    let t = m.sphere_terms(r)?;
    Ok(HBreakdown::from_terms(&t, spec.energy, m.method())?.total)
}

/// Closed expressions built from the hat integrals at the nucleus, as
/// ensembles sharing the layout of the direct profiles.
#[derive(Debug, Clone)]
pub struct ClosedForms {
    pub charge: f64,
    pub rho0: Ensemble,
    /// `4π Σ_j ∫|∇_j φ_j(0, ·)|²`.
    pub grad_phi: Ensemble,
    /// `4π Σ_j ∫|∇_x̂ ψ(0, ·)|²`.
    pub hat_kinetic: Ensemble,
    /// `4π Σ_j ⟨ψ(0,·), [H_{N-1}(Z-1) - E] ψ(0,·)⟩`.
    pub expectation: Ensemble,
    pub h0: Ensemble,
    pub hprime0: Ensemble,
    pub t0: Ensemble,
    pub tprime0: Ensemble,
    pub rho2: Ensemble,
    /// `h̃'(0) - (Z/3)[h̃(0) + Z²ρ̃(0)]`.
    pub rho3_main: Ensemble,
    /// `-(7/12)Z³ρ̃(0) - 4πZ Σ_j [G_j + (5/3) X_j]`.
    pub rho3_alt: Ensemble,
}

impl ClosedForms {
    pub fn from_origin(origin: &OriginTerms, spec: &AtomSpec) -> Result<Self> {
        let z = spec.charge;
        let four_pi = 4.0 * std::f64::consts::PI;
        let mut gp = Vec::with_capacity(origin.slots.len());
        for s in &origin.slots {
            gp.push(s.grad_phi.as_ref().ok_or_else(|| {
                CuspError::UnsupportedModel(
                    "regularized factor has no gradient at the nucleus; closed forms do not apply".into(),
                )
            })?);
        }
        let sum = |items: Vec<&Ensemble>| {
            let t: Vec<(f64, &Ensemble)> = items.into_iter().map(|e| (four_pi, e)).collect();
            Ensemble::linear(&t)
        };
        let rho0 = sum(origin.slots.iter().map(|s| &s.rho).collect());
        let grad_phi = sum(gp);
        let hat_kinetic = sum(origin.slots.iter().map(|s| &s.hat_kinetic).collect());
        let exps: Vec<Ensemble> = origin.slots.iter().map(|s| s.expectation(spec.energy)).collect();
        let expectation = sum(exps.iter().collect());
        let z2 = z * z;
        let z3 = z2 * z;
        let h0 = Ensemble::linear(&[(0.25 * z2, &rho0), (1.0, &grad_phi), (1.0, &expectation)]);
        let diff = Ensemble::linear(&[(1.0, &grad_phi), (-1.0, &expectation)]);
        let hprime0 = Ensemble::linear(&[(-z, &h0), (z3 / 12.0, &rho0), (z / 3.0, &diff)]);
        let t0 = Ensemble::linear(&[(0.25 * z2, &rho0), (1.0, &grad_phi), (1.0, &hat_kinetic)]);
        let tprime0 = Ensemble::linear(&[(-z, &t0), (z3 / 12.0, &rho0), (z / 3.0, &diff)]);
        let rho2 = Ensemble::linear(&[(2.0 / 3.0, &h0), (2.0 / 3.0 * z2, &rho0)]);
        let rho3_main = Ensemble::linear(&[(1.0, &hprime0), (-z / 3.0, &h0), (-z3 / 3.0, &rho0)]);
        let rho3_alt = Ensemble::linear(&[
            (-7.0 / 12.0 * z3, &rho0),
            (-z, &grad_phi),
            (-5.0 / 3.0 * z, &expectation),
        ]);
        Ok(ClosedForms {
            charge: z,
            rho0,
            grad_phi,
            hat_kinetic,
            expectation,
            h0,
            hprime0,
            t0,
            tprime0,
            rho2,
            rho3_main,
            rho3_alt,
        })
    }

    pub fn compute(model: &WavefunctionModel, spec: &AtomSpec, settings: &QuadratureSettings) -> Result<Self> {
        let m = Marginals::new(model, spec, settings)?;
        ClosedForms::from_origin(&m.origin()?, spec)
    }
}

fn estimate_of(e: &Ensemble, settings: &QuadratureSettings, model: &WavefunctionModel) -> IntegralEstimate {
    let method = if model.n_electrons() == 1 {
        Method::Exact
    } else {
        crate::quadrature::hat::HatPlan::new(model.n_electrons(), model.slowest_decay(), &settings.hat)
            .map(|p| p.method())
            .unwrap_or(Method::MonteCarlo)
    };
    e.to_estimate(method, 0)
}

/// `h̃(0) = (Z²/4)ρ̃(0) + 4π Σ_j [G_j + X_j]`; derived from the eigenvalue
/// equation.
pub fn h0_closed(model: &WavefunctionModel, spec: &AtomSpec, settings: &QuadratureSettings) -> Result<IntegralEstimate> {
    let c = ClosedForms::compute(model, spec, settings)?;
    Ok(estimate_of(&c.h0, settings, model))
}

/// `h̃'(0) = -Z h̃(0) + (Z³/12)ρ̃(0) + (4π/3) Z Σ_j [G_j - X_j]`; eigen-only.
pub fn hprime0_closed(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate> {
    let c = ClosedForms::compute(model, spec, settings)?;
    Ok(estimate_of(&c.hprime0, settings, model))
}

/// `t̃(0) = (Z²/4)ρ̃(0) + 4π Σ_j [G_j + K_j]`; valid for any model with a
/// regular factor, no eigenvalue equation needed.
pub fn t0_closed(model: &WavefunctionModel, spec: &AtomSpec, settings: &QuadratureSettings) -> Result<IntegralEstimate> {
    let c = ClosedForms::compute(model, spec, settings)?;
    Ok(estimate_of(&c.t0, settings, model))
}

/// `t̃'(0) = -Z t̃(0) + (Z³/12)ρ̃(0) + (4π/3) Z Σ_j [G_j - X_j]`; eigen-only.
pub fn tprime0_closed(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate> {
    let c = ClosedForms::compute(model, spec, settings)?;
    Ok(estimate_of(&c.tprime0, settings, model))
}

/// `X_j = ∫ |∇_x̂ ψ(0,x̂)|² + (V_{N-1,Z-1}(x̂) - E)|ψ(0,x̂)|² dx̂`. For one
/// electron this is `-E|ψ(0)|²`.
pub fn expectation_prev_hamiltonian(
    model: &WavefunctionModel,
    spec: &AtomSpec,
    j: usize,
    settings: &QuadratureSettings,
) -> Result<IntegralEstimate> {
    let m = Marginals::new(model, spec, settings)?;
    let o = m.origin()?;
    let slot = o.slots.get(j).ok_or_else(|| {
        CuspError::Domain(format!("electron index {j} out of range for {} electrons", spec.n_electrons))
    })?;
    Ok(slot.expectation(spec.energy).to_estimate(m.method(), o.stats.n_evals))
}

/// Named components of the sampled terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Rho,
    Kinetic,
    KineticX,
    KineticHat,
    Nuclear,
    Repulsion,
    H,
}

impl Quantity {
    /// Kinetic parts and `h` are limits at the nucleus, so their stencils
    /// stay off `r = 0`.
    pub fn stencil(&self) -> Stencil {
        match self {
            Quantity::Rho | Quantity::Nuclear | Quantity::Repulsion => Stencil::Forward,
            _ => Stencil::Open,
        }
    }
}

/// Spherical averages of all terms on the radii of a step ladder at `r = 0`.
#[derive(Debug, Clone)]
pub struct TildeProfile {
    pub ladder: StepLadder,
    pub energy: f64,
    pub method: Method,
    pub samples: Vec<(f64, TermSet)>,
}

impl TildeProfile {
    /// Radii needed by the forward and open stencils on `ladder`.
    pub fn radii(ladder: &StepLadder) -> Vec<f64> {
        let mut r = ladder.abscissae(0.0, Stencil::Forward);
        r.extend(ladder.abscissae(0.0, Stencil::Open));
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    pub fn sample(marginals: &Marginals, ladder: StepLadder) -> Result<Self> {
        let samples = marginals.sphere_profile(&TildeProfile::radii(&ladder))?;
        Ok(TildeProfile {
            ladder,
            energy: marginals.spec().energy,
            method: marginals.method(),
            samples,
        })
    }

    pub fn at(&self, r: f64) -> Option<&TermSet> {
        self.samples.iter().find(|(x, _)| *x == r).map(|(_, t)| t)
    }

    fn component(&self, q: Quantity, t: &TermSet) -> Option<Ensemble> {
        match q {
            Quantity::Rho => Some(t.rho.clone()),
            Quantity::Kinetic => t.kinetic(),
            Quantity::KineticX => t.kinetic_x.clone(),
            Quantity::KineticHat => Some(t.kinetic_hat.clone()),
            Quantity::Nuclear => Some(t.nuclear.clone()),
            Quantity::Repulsion => Some(t.repulsion.clone()),
            Quantity::H => t.h(self.energy),
        }
    }

    pub fn profile(&self, q: Quantity) -> Profile {
        Profile::new(
            self.samples
                .iter()
                .filter(|(r, _)| q.stencil() == Stencil::Forward || *r > 0.0)
                .filter_map(|(r, t)| self.component(q, t).map(|e| (*r, e)))
                .collect(),
        )
    }

    /// `q^{(d)}(0)` by Richardson extrapolation.
    pub fn derivative(&self, q: Quantity, d: usize) -> Result<Extrapolated> {
        richardson_derivative(&self.profile(q), 0.0, d, q.stencil(), &self.ladder)
    }

    /// Direct value at the nucleus: the sample at `r = 0` for quantities
    /// defined there, the open-stencil limit otherwise.
    pub fn value_at_zero(&self, q: Quantity) -> Result<Extrapolated> {
        self.derivative(q, 0)
    }
}

/// `(ṽ'(0) + Zṽ(0), w̃'(0) + Zw̃(0))`, both zero for models with the
/// `e^{-Z|x|/2}` factorization.
pub fn vw_cusp_check(profile: &TildeProfile, charge: f64) -> Result<(IntegralEstimate, IntegralEstimate)> {
    let check = |q: Quantity| -> Result<IntegralEstimate> {
        let d = profile.derivative(q, 1)?;
        let v0 = profile.value_at_zero(q)?;
        Ok(combine(&[(1.0, &d), (charge, &v0)], &[], Method::Richardson))
    };
    Ok((check(Quantity::Nuclear)?, check(Quantity::Repulsion)?))
}

/// `h(x) - ερ(x)` at `x = r e_z` for each radius, plus
/// `h̃(0) - (Z²/4 + ε)ρ̃(0)` from the closed form. Skipped when `ε < 0`.
pub fn ion_bound_check(
    marginals: &Marginals,
    closed: Option<&ClosedForms>,
    radii: &[f64],
    binding: bool,
) -> Result<Vec<BoundRow>> {
    let spec = marginals.spec();
    let eps = spec.ion_gap;
    let mut rows = Vec::new();
    if eps < 0.0 {
        let notice = format!("ionization gap {eps} is negative; bound does not apply");
        rows.push(BoundRow::skipped("h(x) >= eps*rho(x)", Relation::AtLeast, &notice, true));
        rows.push(BoundRow::skipped("h~(0) >= (Z^2/4+eps)*rho~(0)", Relation::AtLeast, &notice, true));
        return Ok(rows);
    }
    for &r in radii {
        let t = marginals.point_terms(&Vector3::new(0.0, 0.0, r))?;
        let h = match t.h(spec.energy) {
            Some(h) => h,
            None => continue,
        };
        let diff = Ensemble::linear(&[(1.0, &h), (-eps, &t.rho)]);
        rows.push(BoundRow::evaluate(
            &format!("h(x) >= eps*rho(x) at |x| = {r}"),
            Relation::AtLeast,
            h.primary(),
            eps * t.rho.primary(),
            diff.spread_error(),
            true,
            binding,
        ));
    }
    if let Some(c) = closed {
        let z = spec.charge;
        let rhs = c.rho0.map(|v| (0.25 * z * z + eps) * v);
        let diff = Ensemble::linear(&[(1.0, &c.h0), (-1.0, &rhs)]);
        rows.push(BoundRow::evaluate(
            "h~(0) >= (Z^2/4+eps)*rho~(0)",
            Relation::AtLeast,
            c.h0.primary(),
            rhs.primary(),
            diff.spread_error(),
            true,
            binding,
        ));
    }
    Ok(rows)
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
    fn hydrogen_breakdown() {
        let (m, spec, s) = hydrogen(1, 1.0);
        let x = Vector3::new(0.3, -0.4, 1.2);
        let b = h_terms_at(&m, &spec, 0, &x, &s).unwrap();
        let psi2 = (-x.norm()).exp() / (8.0 * PI);
        assert!((b.t.value - 0.25 * psi2).abs() < 1e-16);
        assert_eq!(b.v.value, 0.0);
        assert_eq!(b.w.value, 0.0);
        assert!((b.e_rho.value + 0.25 * psi2).abs() < 1e-16);
        assert_eq!(b.total.value, b.t.value - b.v.value + b.w.value - b.e_rho.value);
        let h0 = h_tilde(&m, &spec, 0.0, &s).unwrap();
        assert!((h0.value - 0.25).abs() < 1e-15);
        let h1 = h_tilde(&m, &spec, 1.3, &s).unwrap();
        assert!((h1.value - 0.25 * (-1.3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_model_has_zero_h() {
        let (m, spec, s) = hydrogen(1, 1.0);
        let zero = m.scaled(0.0);
        assert_eq!(h_tilde(&zero, &spec, 0.7, &s).unwrap().value, 0.0);
        assert_eq!(h0_closed(&zero, &spec, &s).unwrap().value, 0.0);
    }

    #[test]
    fn hydrogen_closed_forms() {
        let (m, spec, s) = hydrogen(1, 1.0);
        assert!((h0_closed(&m, &spec, &s).unwrap().value - 0.25).abs() < 1e-15);
        assert!((hprime0_closed(&m, &spec, &s).unwrap().value + 0.25).abs() < 1e-15);
        assert!((t0_closed(&m, &spec, &s).unwrap().value - 0.125).abs() < 1e-15);
        assert!((tprime0_closed(&m, &spec, &s).unwrap().value + 0.125).abs() < 1e-15);
        let x = expectation_prev_hamiltonian(&m, &spec, 0, &s).unwrap();
        assert!((x.value - 0.25 / (8.0 * PI)).abs() < 1e-17);

        let (m2, spec2, s2) = hydrogen(2, 1.0);
        let c = ClosedForms::compute(&m2, &spec2, &s2).unwrap();
        let r0 = c.rho0.primary();
        assert!((c.h0.primary() / r0 - 0.3125).abs() < 1e-14);
        assert!((c.hprime0.primary() / r0 + 0.25).abs() < 1e-14);
        assert!((c.rho3_main.primary() / r0 + 0.6875).abs() < 1e-14);
        assert!((c.rho3_alt.primary() / r0 + 0.6875).abs() < 1e-14);
    }

    #[test]
    fn hydrogen_derivatives_from_profile() {
        let (m, spec, s) = hydrogen(1, 1.0);
        let mg = Marginals::new(&m, &spec, &s).unwrap();
        let p = TildeProfile::sample(&mg, StepLadder::reaching(0.1, 6)).unwrap();
        let hp = p.derivative(Quantity::H, 1).unwrap();
        assert!((hp.estimate.value + 0.25).abs() < 1e-5 * 0.25, "{:?}", hp.estimate);
        let t0 = p.value_at_zero(Quantity::Kinetic).unwrap();
        assert!((t0.estimate.value - 0.125).abs() < 1e-9);
        let (v, w) = vw_cusp_check(&p, 1.0).unwrap();
        assert_eq!((v.value, w.value), (0.0, 0.0));
    }

    #[test]
    fn ion_bound_is_saturated_for_hydrogen() {
        for n in [1, 2] {
            let (m, spec, s) = hydrogen(n, 1.0);
            let mg = Marginals::new(&m, &spec, &s).unwrap();
            let c = ClosedForms::from_origin(&mg.origin().unwrap(), &spec).unwrap();
            let rows = ion_bound_check(&mg, Some(&c), &[0.5, 1.0], true).unwrap();
            let last = rows.last().unwrap();
            assert!(last.margin.unwrap().abs() < 1e-15);
            for r in &rows {
                assert_ne!(r.verdict, crate::cusp_report::Verdict::ViolatedBeyondError);
            }
        }
    }

    #[test]
    fn negative_gap_skips() {
        let (m, _, s) = hydrogen(1, 1.0);
        let spec = AtomSpec::new(1, 1.0, -0.25, -0.5).unwrap();
        let mg = Marginals::new(&m, &spec, &s).unwrap();
        let rows = ion_bound_check(&mg, None, &[1.0], true).unwrap();
        assert!(rows.iter().all(|r| r.verdict == crate::cusp_report::Verdict::Skipped));
    }
}

//! Marginal integrals of the quantities built from `ψ`: density, kinetic,
//! nuclear-attraction and repulsion terms of each electron slot, integrated
//! over the hat coordinates and then over spheres `|x| = r`.
//!
//! Every result is an [`Ensemble`] with one common layout per integrator, so
//! later linear steps (sums over terms, stencils, extrapolation) can combine
//! them freely:
//!
//! * deterministic hat integration: `[primary, alternate]`, where the
//!   primary uses the main sphere rule with the fine hat grid and the
//!   alternate the companion rule with the coarse grid;
//! * Monte-Carlo: `[primary, alternate, batch means..]`, where the alternate
//!   is the companion-rule mean over the same samples.

use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CuspError, Result};
use crate::quadrature::estimate::{pairwise_sum, Ensemble, Method};
use crate::quadrature::hat::{HatGrid, HatMethod, HatPass, HatPlan, HatSettings, EXCURSION_LIMIT};
use crate::quadrature::monte_carlo::McSampler;
use crate::quadrature::sphere::SphericalRule;
use crate::wavefunction::{AtomSpec, Configuration, WavefunctionModel};

const RHO: usize = 0;
const KIN_X: usize = 1;
const KIN_HAT: usize = 2;
const NUC: usize = 3;
const REP: usize = 4;
const GRAD_PHI: usize = 5;
const PREV: usize = 6;
const N_BULK: usize = 5;
const N_ORIGIN: usize = 7;

/// Quadrature controls shared by every marginal integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub sphere_degree: u32,
    pub hat: HatSettings,
    /// Evaluate spherical averages of s-type models along a single direction.
    pub symmetry: bool,
}

impl QuadratureSettings {
    /// Defaults sized for the model: the Monte-Carlo envelope and the grid
    /// truncation follow the slowest orbital decay.
    pub fn for_model(model: &WavefunctionModel) -> Self {
        QuadratureSettings {
            sphere_degree: 17,
            hat: HatSettings {
                grid: HatGrid::default(),
                sampler: McSampler::new(0, 4096, model.slowest_decay()),
                method: HatMethod::Auto,
            },
            symmetry: true,
        }
    }
}

/// Evaluation counts and Monte-Carlo health of a set of integrals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassStats {
    pub n_evals: usize,
    pub excursions: usize,
    pub rejected: usize,
}

impl PassStats {
    fn absorb(&mut self, other: &PassStats) {
        self.n_evals += other.n_evals;
        self.excursions = self.excursions.max(other.excursions);
        self.rejected += other.rejected;
    }

    /// Human-readable warnings, if any.
    pub fn notes(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.excursions >= EXCURSION_LIMIT {
            v.push(format!(
                "envelope misfit: {} samples exceeded the envelope bound",
                self.excursions
            ));
        }
        if self.rejected > 0 {
            v.push(format!(
                "{} samples on the singular set counted as zero",
                self.rejected
            ));
        }
        v
    }
}

/// The terms of `h = t - v + w - Eρ`, summed over electron slots.
#[derive(Debug, Clone)]
pub struct TermSet {
    pub rho: Ensemble,
    /// `|∇_x ψ|²` part of `t`. At `x = 0` this is the angular mean of the
    /// directional limits, absent when the model is not regular there.
    pub kinetic_x: Option<Ensemble>,
    /// `|∇_x̂ ψ|²` part of `t`.
    pub kinetic_hat: Ensemble,
    pub nuclear: Ensemble,
    pub repulsion: Ensemble,
    pub stats: PassStats,
}

impl TermSet {
    pub fn kinetic(&self) -> Option<Ensemble> {
        self.kinetic_x
            .as_ref()
            .map(|k| Ensemble::linear(&[(1.0, k), (1.0, &self.kinetic_hat)]))
    }

    pub fn h(&self, energy: f64) -> Option<Ensemble> {
        self.kinetic().map(|t| {
            Ensemble::linear(&[
                (1.0, &t),
                (-1.0, &self.nuclear),
                (1.0, &self.repulsion),
                (-energy, &self.rho),
            ])
        })
    }
}

/// Hat integrals at the nucleus for one electron slot `j`.
#[derive(Debug, Clone)]
pub struct OriginSlot {
    /// `ρ_j(0)`.
    pub rho: Ensemble,
    /// `∫|∇_j φ_j(0, ·)|²`; absent when the regularized factor has no
    /// gradient at the nucleus.
    pub grad_phi: Option<Ensemble>,
    /// `∫|∇_x̂ ψ(0, ·)|²`.
    pub hat_kinetic: Ensemble,
    /// `∫ V_{N-1,Z-1} |ψ(0, ·)|²`.
    pub prev_potential: Ensemble,
    pub nuclear: Ensemble,
    pub repulsion: Ensemble,
}

impl OriginSlot {
    /// `⟨ψ(0,·), [H_{N-1}(Z-1) - E] ψ(0,·)⟩`.
    pub fn expectation(&self, energy: f64) -> Ensemble {
        Ensemble::linear(&[
            (1.0, &self.hat_kinetic),
            (1.0, &self.prev_potential),
            (-energy, &self.rho),
        ])
    }
}

#[derive(Debug, Clone)]
pub struct OriginTerms {
    pub slots: Vec<OriginSlot>,
    pub stats: PassStats,
}

impl OriginTerms {
    /// Spherical averages at `r = 0`: `4π` times the slot sums.
    pub fn sphere_terms(&self, charge: f64) -> TermSet {
        let sum = |f: &dyn Fn(&OriginSlot) -> &Ensemble| {
            let terms: Vec<(f64, &Ensemble)> = self.slots.iter().map(|s| (4.0 * PI, f(s))).collect();
            Ensemble::linear(&terms)
        };
        let rho = sum(&|s| &s.rho);
        let kinetic_x = if self.slots.iter().all(|s| s.grad_phi.is_some()) {
            let g: Vec<(f64, &Ensemble)> = self
                .slots
                .iter()
                .map(|s| (4.0 * PI, s.grad_phi.as_ref().expect("checked")))
                .collect();
            let g = Ensemble::linear(&g);
            Some(Ensemble::linear(&[(0.25 * charge * charge, &rho), (1.0, &g)]))
        } else {
            None
        };
        TermSet {
            kinetic_x,
            kinetic_hat: sum(&|s| &s.hat_kinetic),
            nuclear: sum(&|s| &s.nuclear),
            repulsion: sum(&|s| &s.repulsion),
            rho,
            stats: self.stats,
        }
    }

    pub fn regular(&self) -> bool {
        self.slots.iter().all(|s| s.grad_phi.is_some())
    }
}

/// Integrator for the marginal terms of one model.
pub struct Marginals<'a> {
    model: &'a WavefunctionModel,
    spec: &'a AtomSpec,
    main: SphericalRule,
    companion: SphericalRule,
    plan: HatPlan,
    symmetric: bool,
    regular_at_origin: bool,
}

impl<'a> Marginals<'a> {
    pub fn new(
        model: &'a WavefunctionModel,
        spec: &'a AtomSpec,
        settings: &QuadratureSettings,
    ) -> Result<Self> {
        if model.n_electrons() != spec.n_electrons {
            return Err(CuspError::DimensionMismatch {
                expected: spec.n_electrons,
                got: model.n_electrons(),
            });
        }
        if (model.charge() - spec.charge).abs() > 1e-12 * spec.charge {
            return Err(CuspError::Config(format!(
                "model charge {} differs from system charge {}",
                model.charge(),
                spec.charge
            )));
        }
        let main = SphericalRule::with_degree(settings.sphere_degree)?;
        let companion = main.companion();
        let plan = HatPlan::new(spec.n_electrons, model.slowest_decay(), &settings.hat)?;
        let probe: Vec<Vector3<f64>> = (0..spec.n_electrons - 1)
            .map(|k| Vector3::new(0.31 + 0.17 * k as f64, -0.23, 0.41 - 0.11 * k as f64))
            .collect();
        let mut regular_at_origin = true;
        for j in 0..spec.n_electrons {
            match model.eval_grad_phi(j, &Vector3::zeros(), &probe) {
                Ok(_) => {}
                Err(CuspError::UnsupportedModel(_)) => regular_at_origin = false,
                Err(e) => return Err(e),
            }
        }
        Ok(Marginals {
            model,
            spec,
            main,
            companion,
            plan,
            symmetric: settings.symmetry && model.is_s_type(),
            regular_at_origin,
        })
    }

    pub fn method(&self) -> Method {
        self.plan.method()
    }

    pub fn model(&self) -> &WavefunctionModel {
        self.model
    }

    pub fn spec(&self) -> &AtomSpec {
        self.spec
    }

    /// Whether every regularized factor has a gradient at the nucleus.
    pub fn regular_at_origin(&self) -> bool {
        self.regular_at_origin
    }

    /// Whether spherical averages are taken along a single direction.
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    fn monte_carlo(&self) -> bool {
        matches!(self.plan, HatPlan::MonteCarlo(_))
    }

    fn combine(&self, primary: &[f64], alternate: f64) -> Ensemble {
        if self.monte_carlo() {
            Ensemble::nested_batches(primary[0], alternate, &primary[1..])
        } else {
            Ensemble::nested(primary[0], alternate)
        }
    }

    /// Hat integrals of the bulk integrand for slot `j` at `x ≠ 0`.
    fn slot_pass(&self, j: usize, x: &Vector3<f64>, pass: HatPass) -> Result<(Vec<Vec<f64>>, PassStats)> {
        let model = self.model;
        let z = self.spec.charge;
        let n = self.spec.n_electrons;
        let failure: Mutex<Option<CuspError>> = Mutex::new(None);
        let f = |hat: &[Vector3<f64>], out: &mut [f64]| {
            let c = Configuration::assemble(j, x, hat);
            let res = model.eval_psi(&c).and_then(|psi| {
                let g = model.eval_grad_psi(&c)?;
                Ok((psi, g))
            });
            match res {
                Ok((psi, g)) => {
                    let p2 = psi * psi;
                    out[RHO] = p2;
                    out[KIN_X] = g[j].norm_squared();
                    out[KIN_HAT] = (0..n).filter(|&k| k != j).map(|k| g[k].norm_squared()).sum();
                    let (nuc, rep) = coulomb(x, hat);
                    out[NUC] = z * nuc * p2;
                    out[REP] = rep * p2;
                }
                Err(e) => fail(&failure, e, out),
            }
        };
        let out = self.plan.integrate_pass(x, N_BULK, &f, pass);
        take_failure(failure)?;
        let out = out?;
        Ok((
            out.values,
            PassStats {
                n_evals: out.n_evals,
                excursions: out.excursions,
                rejected: out.rejected,
            },
        ))
    }

    /// Bulk outputs summed over slots at `x ≠ 0`.
    fn point_pass(&self, x: &Vector3<f64>, pass: HatPass) -> Result<(Vec<Vec<f64>>, PassStats)> {
        let mut acc: Option<Vec<Vec<f64>>> = None;
        let mut stats = PassStats::default();
        for j in 0..self.spec.n_electrons {
            let (v, s) = self.slot_pass(j, x, pass)?;
            stats.absorb(&s);
            acc = Some(match acc {
                None => v,
                Some(mut a) => {
                    for (ai, vi) in a.iter_mut().zip(&v) {
                        for (p, q) in ai.iter_mut().zip(vi) {
                            *p += q;
                        }
                    }
                    a
                }
            });
        }
        Ok((acc.expect("at least one electron"), stats))
    }

    /// Point values of the slot-`j` terms at `x`. At `x = 0` the kinetic
    /// `x`-part is the angular mean of its directional limits.
    pub fn electron_terms(&self, j: usize, x: &Vector3<f64>) -> Result<TermSet> {
        if j >= self.spec.n_electrons {
            return Err(CuspError::Domain(format!(
                "electron index {j} out of range for {} electrons",
                self.spec.n_electrons
            )));
        }
        if x.norm() == 0.0 {
            let slot = self.origin_slot(j)?;
            let one = OriginTerms {
                slots: vec![slot.0],
                stats: slot.1,
            };
            let mut t = one.sphere_terms(self.spec.charge);
            scale_terms(&mut t, 1.0 / (4.0 * PI));
            return Ok(t);
        }
        let (p, sp) = self.slot_pass(j, x, HatPass::Primary)?;
        self.point_terms_from(p, sp, || self.slot_pass(j, x, HatPass::Alternate))
    }

    /// Point values of the terms summed over slots.
    pub fn point_terms(&self, x: &Vector3<f64>) -> Result<TermSet> {
        if x.norm() == 0.0 {
            let mut t = self.origin()?.sphere_terms(self.spec.charge);
            scale_terms(&mut t, 1.0 / (4.0 * PI));
            return Ok(t);
        }
        let (p, sp) = self.point_pass(x, HatPass::Primary)?;
        self.point_terms_from(p, sp, || self.point_pass(x, HatPass::Alternate))
    }

    fn point_terms_from(
        &self,
        p: Vec<Vec<f64>>,
        mut stats: PassStats,
        alternate: impl FnOnce() -> Result<(Vec<Vec<f64>>, PassStats)>,
    ) -> Result<TermSet> {
        let a: Vec<f64> = if self.monte_carlo() {
            p.iter().map(|v| v[0]).collect()
        } else {
            let (a, sa) = alternate()?;
            stats.absorb(&sa);
            a.iter().map(|v| v[0]).collect()
        };
        Ok(self.term_set(&p, &a, stats))
    }

    fn term_set(&self, p: &[Vec<f64>], a: &[f64], stats: PassStats) -> TermSet {
        let e = |i: usize| self.combine(&p[i], a[i]);
        TermSet {
            rho: e(RHO),
            kinetic_x: Some(e(KIN_X)),
            kinetic_hat: e(KIN_HAT),
            nuclear: e(NUC),
            repulsion: e(REP),
            stats,
        }
    }

    /// Weighted sum of `point_pass` over the nodes of `rule` at radius `r`.
    fn sphere_pass(&self, r: f64, rule: &SphericalRule, pass: HatPass) -> Result<(Vec<Vec<f64>>, PassStats)> {
        let nodes: Vec<(Vector3<f64>, f64)> = if self.symmetric {
            vec![(Vector3::z(), 4.0 * PI)]
        } else {
            rule.nodes().iter().copied().zip(rule.weights().iter().copied()).collect()
        };
        let per_node: Vec<(Vec<Vec<f64>>, PassStats)> = nodes
            .par_iter()
            .map(|(w, _)| self.point_pass(&(w * r), pass))
            .collect::<Result<_>>()?;
        let mut stats = PassStats::default();
        for (_, s) in &per_node {
            stats.absorb(s);
        }
        let width = per_node[0].0[0].len();
        let sums = (0..N_BULK)
            .map(|i| {
                (0..width)
                    .map(|c| {
                        let terms: Vec<f64> = per_node
                            .iter()
                            .zip(&nodes)
                            .map(|((v, _), (_, wt))| wt * v[i][c])
                            .collect();
                        pairwise_sum(&terms)
                    })
                    .collect()
            })
            .collect();
        Ok((sums, stats))
    }

    /// Spherical averages `∫_{S²} (·)(rω) dω` of all terms at radius `r`.
    pub fn sphere_terms(&self, r: f64) -> Result<TermSet> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(CuspError::Domain(format!("radius must be finite and nonnegative, got {r}")));
        }
        if r == 0.0 {
            return Ok(self.origin()?.sphere_terms(self.spec.charge));
        }
        let (p, mut stats) = self.sphere_pass(r, &self.main, HatPass::Primary)?;
        let a: Vec<f64> = if self.monte_carlo() && self.symmetric {
            p.iter().map(|v| v[0]).collect()
        } else {
            let (a, sa) = self.sphere_pass(r, &self.companion, HatPass::Alternate)?;
            stats.absorb(&sa);
            a.iter().map(|v| v[0]).collect()
        };
        Ok(self.term_set(&p, &a, stats))
    }

    /// Sphere terms at each radius, evaluated in parallel.
    pub fn sphere_profile(&self, radii: &[f64]) -> Result<Vec<(f64, TermSet)>> {
        let origin = if radii.contains(&0.0) {
            Some(self.origin()?)
        } else {
            None
        };
        radii
            .par_iter()
            .map(|&r| {
                let t = match (&origin, r == 0.0) {
                    (Some(o), true) => o.sphere_terms(self.spec.charge),
                    _ => self.sphere_terms(r)?,
                };
                Ok((r, t))
            })
            .collect()
    }

    fn origin_slot_pass(&self, j: usize, pass: HatPass) -> Result<(Vec<Vec<f64>>, PassStats)> {
        let model = self.model;
        let z = self.spec.charge;
        let n = self.spec.n_electrons;
        let regular = self.regular_at_origin;
        let zero = Vector3::zeros();
        let mut want = vec![true; n];
        want[j] = false;
        let failure: Mutex<Option<CuspError>> = Mutex::new(None);
        let f = |hat: &[Vector3<f64>], out: &mut [f64]| {
            let c = Configuration::assemble(j, &zero, hat);
            let res = model.eval_psi(&c).and_then(|psi| {
                let g = model.grad_slots(&c, &want)?;
                let gp = if regular {
                    model.eval_grad_phi(j, &zero, hat)?.norm_squared()
                } else {
                    0.0
                };
                Ok((psi, g, gp))
            });
            match res {
                Ok((psi, g, gp)) => {
                    let p2 = psi * psi;
                    let (nuc, rep) = coulomb(&zero, hat);
                    let pairs = rep - nuc;
                    out[RHO] = p2;
                    out[KIN_X] = 0.25 * z * z * p2 + gp;
                    out[KIN_HAT] = g.iter().map(|v| v.norm_squared()).sum();
                    out[NUC] = z * nuc * p2;
                    out[REP] = rep * p2;
                    out[GRAD_PHI] = gp;
                    out[PREV] = (pairs - (z - 1.0) * nuc) * p2;
                }
                Err(e) => fail(&failure, e, out),
            }
        };
        let out = self.plan.integrate_pass(&zero, N_ORIGIN, &f, pass);
        take_failure(failure)?;
        let out = out?;
        Ok((
            out.values,
            PassStats {
                n_evals: out.n_evals,
                excursions: out.excursions,
                rejected: out.rejected,
            },
        ))
    }

    fn origin_slot(&self, j: usize) -> Result<(OriginSlot, PassStats)> {
        let (p, mut stats) = self.origin_slot_pass(j, HatPass::Primary)?;
        let a: Vec<f64> = if self.monte_carlo() {
            p.iter().map(|v| v[0]).collect()
        } else {
            let (a, sa) = self.origin_slot_pass(j, HatPass::Alternate)?;
            stats.absorb(&sa);
            a.iter().map(|v| v[0]).collect()
        };
        let e = |i: usize| self.combine(&p[i], a[i]);
        Ok((
            OriginSlot {
                rho: e(RHO),
                grad_phi: self.regular_at_origin.then(|| e(GRAD_PHI)),
                hat_kinetic: e(KIN_HAT),
                prev_potential: e(PREV),
                nuclear: e(NUC),
                repulsion: e(REP),
            },
            stats,
        ))
    }

    /// Hat integrals at the nucleus for every slot.
    pub fn origin(&self) -> Result<OriginTerms> {
        let per_slot: Vec<(OriginSlot, PassStats)> = (0..self.spec.n_electrons)
            .into_par_iter()
            .map(|j| self.origin_slot(j))
            .collect::<Result<_>>()?;
        let mut stats = PassStats::default();
        let slots = per_slot
            .into_iter()
            .map(|(s, st)| {
                stats.absorb(&st);
                s
            })
            .collect();
        Ok(OriginTerms { slots, stats })
    }
}

/// `(Σ_k 1/|y_k|, Σ_k 1/|x - y_k| + Σ_{k<l} 1/|y_k - y_l|)`.
fn coulomb(x: &Vector3<f64>, hat: &[Vector3<f64>]) -> (f64, f64) {
    let mut nuc = 0.0;
    let mut rep = 0.0;
    for (k, y) in hat.iter().enumerate() {
        nuc += 1.0 / y.norm();
        rep += 1.0 / (x - y).norm();
        for z in &hat[k + 1..] {
            rep += 1.0 / (y - z).norm();
        }
    }
    (nuc, rep)
}

/// Records a hard failure, or marks the sample non-finite when it sits on
/// the singular set.
fn fail(slot: &Mutex<Option<CuspError>>, e: CuspError, out: &mut [f64]) {
    if !matches!(e, CuspError::SingularPoint(_)) {
        let mut g = slot.lock().expect("failure slot poisoned");
        if g.is_none() {
            *g = Some(e);
        }
    }
    out.iter_mut().for_each(|v| *v = f64::NAN);
}

fn take_failure(slot: Mutex<Option<CuspError>>) -> Result<()> {
    match slot.into_inner().expect("failure slot poisoned") {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn scale_terms(t: &mut TermSet, s: f64) {
    let sc = |e: &Ensemble| e.map(|v| v * s);
    t.rho = sc(&t.rho);
    t.kinetic_x = t.kinetic_x.as_ref().map(sc);
    t.kinetic_hat = sc(&t.kinetic_hat);
    t.nuclear = sc(&t.nuclear);
    t.repulsion = sc(&t.repulsion);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::RadialOrbital;

    fn he_product() -> (WavefunctionModel, AtomSpec) {
        let o = RadialOrbital::new(vec![1.0], 1.0, 0, 0).unwrap();
        let m = WavefunctionModel::orbital_product(vec![o.clone(), o], 2.0).unwrap();
        (m, AtomSpec::new(2, 2.0, -1.375, -1.0).unwrap())
    }

    #[test]
    fn hydrogen_terms_along_radius() {
        let m = WavefunctionModel::hydrogenic(1, 0, 0, 1.0).unwrap();
        let spec = AtomSpec::hydrogenic(1, 1.0).unwrap();
        let mut s = QuadratureSettings::for_model(&m);
        s.symmetry = false;
        let mg = Marginals::new(&m, &spec, &s).unwrap();
        for r in [0.0, 0.3, 1.0, 4.0] {
            let t = mg.sphere_terms(r).unwrap();
            let rho = 0.5 * (-r).exp();
            assert!((t.rho.primary() - rho).abs() < 1e-14, "r={r}");
            assert!((t.kinetic().unwrap().primary() - 0.25 * rho).abs() < 1e-14);
            assert_eq!(t.nuclear.primary(), 0.0);
            assert!((t.h(-0.25).unwrap().primary() - 0.5 * rho).abs() < 1e-14);
            assert!(t.rho.spread_error() < 1e-15);
        }
    }

    #[test]
    fn he_product_origin_is_separable() {
        let (m, spec) = he_product();
        let s = QuadratureSettings::for_model(&m);
        let mg = Marginals::new(&m, &spec, &s).unwrap();
        let o = mg.origin().unwrap();
        assert!(o.regular());
        // each slot: |1s(0)|² = Z³/(8π) with Z = 2
        let want = 8.0 / (8.0 * PI);
        for sl in &o.slots {
            assert!((sl.rho.primary() - want).abs() < 1e-12, "{}", sl.rho.primary());
            assert!(sl.grad_phi.as_ref().unwrap().primary().abs() < 1e-24);
            // kinetic of the other 1s factor: (Z/2)² = 1 times ρ_j(0)
            assert!((sl.hat_kinetic.primary() - want).abs() < 1e-11);
            // ⟨Z/|y|⟩ = Z for e^{-2|y|}/π, times ρ_j(0)
            assert!((sl.nuclear.primary() - 2.0 * want).abs() < 1e-11);
        }
    }

    #[test]
    fn symmetric_and_full_averages_agree() {
        let (m, spec) = he_product();
        let mut s = QuadratureSettings::for_model(&m);
        s.sphere_degree = 3;
        s.hat.grid = HatGrid {
            radial_panels: 8,
            radial_order: 8,
            angular_order: 8,
            azimuth_points: 4,
        };
        let sym = Marginals::new(&m, &spec, &s).unwrap().sphere_terms(0.4).unwrap();
        s.symmetry = false;
        let full = Marginals::new(&m, &spec, &s).unwrap().sphere_terms(0.4).unwrap();
        for (a, b) in [(&sym.rho, &full.rho), (&sym.repulsion, &full.repulsion)] {
            assert!((a.primary() - b.primary()).abs() < 1e-8 * a.primary().abs());
        }
    }

    #[test]
    fn mismatched_spec_is_rejected() {
        let (m, _) = he_product();
        let spec = AtomSpec::hydrogenic(1, 2.0).unwrap();
        let s = QuadratureSettings::for_model(&m);
        assert!(matches!(
            Marginals::new(&m, &spec, &s),
            Err(CuspError::DimensionMismatch { .. })
        ));
    }
}

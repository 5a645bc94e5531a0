//! Jastrow-type singular factors `F₂ + F₃`, their smoothly cut-off
//! versions, the second-derivative contractions that appear when the
//! density's third derivative is dominated, and two regularity probes.
//!
//! ```text
//! F₂ = Σ_i -(Z/2)|x_i| + Σ_{i<j} |x_i - x_j|/4
//! F₃ = C₀ Z Σ_{i<j} (x_i·x_j) ln(|x_i|² + |x_j|²),   C₀ = (2-π)/(12π)
//! ```

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CuspError, Result};
use crate::wavefunction::{Configuration, WavefunctionModel};

/// Prefactor of the logarithmic three-body term.
pub const C0: f64 = (2.0 - std::f64::consts::PI) / (12.0 * std::f64::consts::PI);

/// Smooth plateau cutoff: 1 on `|s| ≤ inner`, 0 on `|s| ≥ outer`.
///
/// Built from `g(s) = e^{-1/s}` so every derivative vanishes at both
/// shoulders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFn {
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl Default for CutoffFn {
    fn default() -> Self {
        CutoffFn {
            inner_radius: 1.0,
            outer_radius: 2.0,
        }
    }
}

/// `g`, `g'`, `g''` for `g(s) = e^{-1/s}` (zero for `s ≤ 0`).
fn bump_jet(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / s).exp();
    if g == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let inv = 1.0 / s;
    (g, g * inv * inv, g * (inv.powi(4) - 2.0 * inv.powi(3)))
}

impl CutoffFn {
    pub fn new(inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && outer_radius > inner_radius) {
            return Err(CuspError::Domain(format!(
                "cutoff needs 0 < inner < outer, got {inner_radius}, {outer_radius}"
            )));
        }
        Ok(CutoffFn {
            inner_radius,
            outer_radius,
        })
    }

    /// `χ(t), χ'(t), χ''(t)` for `t ≥ 0`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.inner_radius {
            return (1.0, 0.0, 0.0);
        }
        if t >= self.outer_radius {
            return (0.0, 0.0, 0.0);
        }
        let (a, a1, a2) = bump_jet(self.outer_radius - t);
        let (b, b1, b2) = bump_jet(t - self.inner_radius);
        // d/dt of a(outer - t) flips the sign of odd derivatives.
        let (a1, b1) = (-a1, b1);
        let sum = a + b;
        let num = a1 * b - a * b1;
        let num1 = a2 * b - a * b2;
        let sum1 = a1 + b1;
        let s2 = sum * sum;
        (a / sum, num / s2, num1 / s2 - 2.0 * num * sum1 / (s2 * sum))
    }

    /// `χ(|s|)`.
    pub fn value(&self, s: f64) -> f64 {
        self.jet(s.abs()).0
    }
}

/// Value, gradient and Hessian of `f(|x|)` on `R³` given the radial jet.
fn radial_lift(x: &Vector3<f64>, f: (f64, f64, f64)) -> Result<(f64, Vector3<f64>, Matrix3<f64>)> {
    let r = x.norm();
    if f.1 == 0.0 && f.2 == 0.0 {
        return Ok((f.0, Vector3::zeros(), Matrix3::zeros()));
    }
    if r == 0.0 {
        return Err(CuspError::SingularPoint("radial term at its center".into()));
    }
    let u = x / r;
    let uu = u * u.transpose();
    let h = uu * f.2 + (Matrix3::identity() - uu) * (f.1 / r);
    Ok((f.0, u * f.1, h))
}

/// Radial jet of `s·χ(s)` (or `s` with no cutoff).
fn linear_jet(t: f64, cut: Option<&CutoffFn>) -> (f64, f64, f64) {
    match cut {
        None => (t, 1.0, 0.0),
        Some(c) => {
            let (x, x1, x2) = c.jet(t);
            (x * t, x1 * t + x, x2 * t + 2.0 * x1)
        }
    }
}

/// Second-order jet on `R⁶ = (x, y)`.
#[derive(Debug, Clone, Copy)]
struct Jet6 {
    v: f64,
    g: Vector6<f64>,
    h: Matrix6<f64>,
}

impl Jet6 {
    fn constant(v: f64) -> Self {
        Jet6 {
            v,
            g: Vector6::zeros(),
            h: Matrix6::zeros(),
        }
    }

    fn from_slot(slot: usize, (v, g3, h3): (f64, Vector3<f64>, Matrix3<f64>)) -> Self {
        let mut j = Jet6::constant(v);
        j.g.fixed_rows_mut::<3>(3 * slot).copy_from(&g3);
        j.h.fixed_view_mut::<3, 3>(3 * slot, 3 * slot).copy_from(&h3);
        j
    }

    fn mul(&self, o: &Jet6) -> Jet6 {
        let cross = self.g * o.g.transpose();
        Jet6 {
            v: self.v * o.v,
            g: self.g * o.v + o.g * self.v,
            h: self.h * o.v + o.h * self.v + cross + cross.transpose(),
        }
    }

    fn scale(&self, c: f64) -> Jet6 {
        Jet6 {
            v: self.v * c,
            g: self.g * c,
            h: self.h * c,
        }
    }
}

fn dot_jet(x: &Vector3<f64>, y: &Vector3<f64>) -> Jet6 {
    let mut j = Jet6::constant(x.dot(y));
    j.g.fixed_rows_mut::<3>(0).copy_from(y);
    j.g.fixed_rows_mut::<3>(3).copy_from(x);
    for k in 0..3 {
        j.h[(k, 3 + k)] = 1.0;
        j.h[(3 + k, k)] = 1.0;
    }
    j
}

fn log_jet(x: &Vector3<f64>, y: &Vector3<f64>) -> Result<Jet6> {
    let q = x.norm_squared() + y.norm_squared();
    if q == 0.0 {
        return Err(CuspError::SingularPoint("two electrons jointly at the nucleus".into()));
    }
    let z = Vector6::new(x[0], x[1], x[2], y[0], y[1], y[2]);
    Ok(Jet6 {
        v: q.ln(),
        g: z * (2.0 / q),
        h: Matrix6::identity() * (2.0 / q) - z * z.transpose() * (4.0 / (q * q)),
    })
}

/// Which pieces of the factor to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    F2,
    F3,
    F2Cut,
    F3Cut,
}

/// Value, gradient and Hessian of one part on `R^{3N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Derivatives {
    fn zeros(n: usize) -> Self {
        Derivatives {
            value: 0.0,
            gradient: DVector::zeros(3 * n),
            hessian: DMatrix::zeros(3 * n, 3 * n),
        }
    }

    fn add_single(&mut self, i: usize, (v, g, h): (f64, Vector3<f64>, Matrix3<f64>)) {
        self.value += v;
        let mut gi = self.gradient.fixed_rows_mut::<3>(3 * i);
        gi += g;
        let mut hi = self.hessian.fixed_view_mut::<3, 3>(3 * i, 3 * i);
        hi += h;
    }

    /// A function of `x_i - x_j`.
    fn add_difference(&mut self, i: usize, j: usize, (v, g, h): (f64, Vector3<f64>, Matrix3<f64>)) {
        self.value += v;
        {
            let mut gi = self.gradient.fixed_rows_mut::<3>(3 * i);
            gi += g;
        }
        {
            let mut gj = self.gradient.fixed_rows_mut::<3>(3 * j);
            gj -= g;
        }
        for (a, b, s) in [(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)] {
            let mut blk = self.hessian.fixed_view_mut::<3, 3>(3 * a, 3 * b);
            blk += h * s;
        }
    }

    fn add_pair(&mut self, i: usize, j: usize, jet: &Jet6) {
        self.value += jet.v;
        for (slot, e) in [(0, i), (1, j)] {
            let mut g = self.gradient.fixed_rows_mut::<3>(3 * e);
            g += jet.g.fixed_rows::<3>(3 * slot);
        }
        for (sa, a) in [(0, i), (1, j)] {
            for (sb, b) in [(0, i), (1, j)] {
                let mut blk = self.hessian.fixed_view_mut::<3, 3>(3 * a, 3 * b);
                blk += jet.h.fixed_view::<3, 3>(3 * sa, 3 * sb);
            }
        }
    }
}

fn cutoff_lift(x: &Vector3<f64>, cut: &CutoffFn) -> Result<(f64, Vector3<f64>, Matrix3<f64>)> {
    radial_lift(x, cut.jet(x.norm()))
}

fn f3_pair_jet(x: &Vector3<f64>, y: &Vector3<f64>, charge: f64, cut: Option<&CutoffFn>) -> Result<Jet6> {
    let mut jet = dot_jet(x, y).mul(&log_jet(x, y)?);
    if let Some(c) = cut {
        let a = Jet6::from_slot(0, cutoff_lift(x, c)?);
        let b = Jet6::from_slot(1, cutoff_lift(y, c)?);
        jet = jet.mul(&a).mul(&b);
    }
    Ok(jet.scale(C0 * charge))
}

/// Analytic value, gradient and Hessian of one part.
///
/// Fails with a singular-point error at the nucleus or at a coincidence for
/// the two-body parts, and at a joint nuclear position for the three-body
/// parts.
pub fn derivatives(c: &Configuration, charge: f64, part: Part, cut: &CutoffFn) -> Result<Derivatives> {
    let x = &c.coords;
    let n = x.len();
    let mut d = Derivatives::zeros(n);
    match part {
        Part::F2 | Part::F2Cut => {
            let cut = (part == Part::F2Cut).then_some(cut);
            for (i, xi) in x.iter().enumerate() {
                let (v, v1, v2) = linear_jet(xi.norm(), cut);
                let s = -0.5 * charge;
                let lifted = radial_lift(xi, (v * s, v1 * s, v2 * s))
                    .map_err(|_| CuspError::SingularPoint(format!("electron {i} at the nucleus")))?;
                d.add_single(i, lifted);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let diff = x[i] - x[j];
                    let (v, v1, v2) = linear_jet(diff.norm(), cut);
                    let lifted = radial_lift(&diff, (0.25 * v, 0.25 * v1, 0.25 * v2))
                        .map_err(|_| CuspError::SingularPoint(format!("electrons {i} and {j} coincide")))?;
                    d.add_difference(i, j, lifted);
                }
            }
        }
        Part::F3 | Part::F3Cut => {
            let cut = (part == Part::F3Cut).then_some(cut);
            for i in 0..n {
                for j in (i + 1)..n {
                    d.add_pair(i, j, &f3_pair_jet(&x[i], &x[j], charge, cut)?);
                }
            }
        }
    }
    Ok(d)
}

/// `F₂` at a configuration.
pub fn f2(c: &Configuration, charge: f64) -> f64 {
    f2_with(c, charge, None)
}

fn f2_with(c: &Configuration, charge: f64, cut: Option<&CutoffFn>) -> f64 {
    let x = &c.coords;
    let mut s: f64 = x.iter().map(|xi| -0.5 * charge * linear_jet(xi.norm(), cut).0).sum();
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            s += 0.25 * linear_jet((x[i] - x[j]).norm(), cut).0;
        }
    }
    s
}

/// `F₃` at a configuration; a pair jointly at the nucleus contributes its
/// limit 0.
pub fn f3(c: &Configuration, charge: f64) -> f64 {
    f3_with(c, charge, None)
}

fn f3_with(c: &Configuration, charge: f64, cut: Option<&CutoffFn>) -> f64 {
    let x = &c.coords;
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let q = x[i].norm_squared() + x[j].norm_squared();
            if q == 0.0 {
                continue;
            }
            let weight = cut.map_or(1.0, |c| c.value(x[i].norm()) * c.value(x[j].norm()));
            if weight != 0.0 {
                s += weight * x[i].dot(&x[j]) * q.ln();
            }
        }
    }
    C0 * charge * s
}

/// Values of `F₂`, `F₃`, their cut-off versions, and derivatives of
/// `F_cut = F₂,cut + F₃,cut` where they exist.
#[derive(Debug, Clone, PartialEq)]
pub struct JastrowParts {
    pub f2: f64,
    pub f3: f64,
    pub f2_cut: f64,
    pub f3_cut: f64,
    /// `∇F_cut`; `None` on the singular set.
    pub grad: Option<DVector<f64>>,
    hessian: Option<DMatrix<f64>>,
}

impl JastrowParts {
    pub fn f_cut(&self) -> f64 {
        self.f2_cut + self.f3_cut
    }

    pub fn hessian(&self) -> Option<&DMatrix<f64>> {
        self.hessian.as_ref()
    }

    /// `∂²F_cut/∂x_{i,k}∂x_{j,m}` for index pairs `(i, k)` and `(j, m)`.
    pub fn hessian_entry(&self, a: (usize, usize), b: (usize, usize)) -> Result<f64> {
        let h = self
            .hessian
            .as_ref()
            .ok_or_else(|| CuspError::SingularPoint("second partials undefined at this configuration".into()))?;
        let (p, q) = (3 * a.0 + a.1, 3 * b.0 + b.1);
        if a.1 > 2 || b.1 > 2 || p >= h.nrows() || q >= h.nrows() {
            return Err(CuspError::Domain(format!("index pair {a:?}, {b:?} out of range")));
        }
        Ok(h[(p, q)])
    }
}

/// All Jastrow values at `c` with the default unit cutoff.
pub fn f_cut(c: &Configuration, charge: f64) -> JastrowParts {
    f_cut_with(c, charge, &CutoffFn::default())
}

pub fn f_cut_with(c: &Configuration, charge: f64, cut: &CutoffFn) -> JastrowParts {
    let derivs = fcut_derivatives(c, charge, cut).ok();
    JastrowParts {
        f2: f2(c, charge),
        f3: f3(c, charge),
        f2_cut: f2_with(c, charge, Some(cut)),
        f3_cut: f3_with(c, charge, Some(cut)),
        grad: derivs.as_ref().map(|d| d.gradient.clone()),
        hessian: derivs.map(|d| d.hessian),
    }
}

fn fcut_derivatives(c: &Configuration, charge: f64, cut: &CutoffFn) -> Result<Derivatives> {
    let mut d = derivatives(c, charge, Part::F2Cut, cut)?;
    let d3 = derivatives(c, charge, Part::F3Cut, cut)?;
    d.value += d3.value;
    d.gradient += d3.gradient;
    d.hessian += d3.hessian;
    Ok(d)
}

/// Analytic `∂²F_cut/∂x_{i,k}∂x_{j,m}`.
pub fn second_partials_fcut(c: &Configuration, charge: f64, a: (usize, usize), b: (usize, usize)) -> Result<f64> {
    let d = fcut_derivatives(c, charge, &CutoffFn::default())?;
    JastrowParts {
        f2: 0.0,
        f3: 0.0,
        f2_cut: 0.0,
        f3_cut: 0.0,
        grad: None,
        hessian: Some(d.hessian),
    }
    .hessian_entry(a, b)
}

/// Log-leading part of the Hessian of `F₃,cut`:
/// `C₀ Z Σ_{i<j} χ(|x_i|)χ(|x_j|) ln(|x_i|²+|x_j|²) ∂²(x_i·x_j)`.
pub fn f3_log_hessian(c: &Configuration, charge: f64, cut: &CutoffFn) -> Result<DMatrix<f64>> {
    let x = &c.coords;
    let n = x.len();
    let mut h = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = cut.value(x[i].norm()) * cut.value(x[j].norm());
            if w == 0.0 {
                continue;
            }
            let q = x[i].norm_squared() + x[j].norm_squared();
            if q == 0.0 {
                return Err(CuspError::SingularPoint(format!("electrons {i} and {j} jointly at the nucleus")));
            }
            let s = C0 * charge * w * q.ln();
            for k in 0..3 {
                h[(3 * i + k, 3 * j + k)] += s;
                h[(3 * j + k, 3 * i + k)] += s;
            }
        }
    }
    Ok(h)
}

/// Electron 1 off the nucleus and no two electrons coincide.
fn check_regular(c: &Configuration) -> Result<()> {
    let x = &c.coords;
    if x.is_empty() || x[0].norm() == 0.0 {
        return Err(CuspError::SingularPoint("first electron at the nucleus".into()));
    }
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if x[i] == x[j] {
                return Err(CuspError::SingularPoint(format!("electrons {i} and {j} coincide")));
            }
        }
    }
    Ok(())
}

/// `Σ_{ℓ,k,m} 2 (x_{1,k}/|x_1|) ∂_{ℓ,m}ψ ψ H_{(1,k),(ℓ,m)}` for a Hessian `H`.
fn contract_first_row(omega: &Vector3<f64>, grad: &[Vector3<f64>], psi: f64, h: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        for (l, g) in grad.iter().enumerate() {
            for m in 0..3 {
                s += 2.0 * omega[k] * g[m] * psi * h[(k, 3 * l + m)];
            }
        }
    }
    s
}

/// Contraction of the `F₂` Hessian against `x₁/|x₁|` and `ψ∇ψ`, and its
/// closed pair-sum form. The nuclear terms drop out of the contraction.
pub fn contracted_f2_identity(model: &WavefunctionModel, c: &Configuration) -> Result<(f64, f64)> {
    check_regular(c)?;
    let charge = model.charge();
    let psi = model.eval_psi(c)?;
    let grad = model.eval_grad_psi(c)?;
    let h = derivatives(c, charge, Part::F2, &CutoffFn::default())?.hessian;
    let x = &c.coords;
    let omega = x[0] / x[0].norm();
    let lhs = contract_first_row(&omega, &grad, psi, &h);
    let mut rhs = 0.0;
    for i in 1..x.len() {
        let d = x[0] - x[i];
        let dn = d.norm();
        let dg = grad[0] - grad[i];
        rhs += omega.dot(&dg) / dn - omega.dot(&d) / dn.powi(3) * dg.dot(&d);
    }
    Ok((lhs, 0.5 * psi * rhs))
}

/// Contraction of the log-leading `F₃,cut` Hessian and its closed form
/// `2C₀Zψ Σ_{i≥2} χ(|x₁|)χ(|x_i|) ln(|x₁|²+|x_i|²) (x₁/|x₁|)·∇_iψ`.
pub fn f3_log_contraction(model: &WavefunctionModel, c: &Configuration) -> Result<(f64, f64)> {
    check_regular(c)?;
    let charge = model.charge();
    let cut = CutoffFn::default();
    let psi = model.eval_psi(c)?;
    let grad = model.eval_grad_psi(c)?;
    let h = f3_log_hessian(c, charge, &cut)?;
    let x = &c.coords;
    let omega = x[0] / x[0].norm();
    let lhs = contract_first_row(&omega, &grad, psi, &h);
    let mut rhs = 0.0;
    for i in 1..x.len() {
        let w = cut.value(x[0].norm()) * cut.value(x[i].norm());
        if w != 0.0 {
            rhs += w * (x[0].norm_squared() + x[i].norm_squared()).ln() * omega.dot(&grad[i]);
        }
    }
    Ok((lhs, 2.0 * C0 * charge * psi * rhs))
}

/// Mixed second partial by central differences, Richardson-combined over
/// steps `h` and `h/2`. Returns the value and the size of the correction.
pub fn fd_second_partial(f: impl Fn(&[f64]) -> f64, x: &[f64], a: usize, b: usize, h: f64) -> (f64, f64) {
    let eval = |da: f64, db: f64| {
        let mut y = x.to_vec();
        y[a] += da;
        y[b] += db;
        f(&y)
    };
    let central = |h: f64| {
        if a == b {
            (eval(h, 0.0) - 2.0 * f(x) + eval(-h, 0.0)) / (h * h)
        } else {
            (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h)
        }
    };
    let coarse = central(h);
    let fine = central(0.5 * h);
    let r = (4.0 * fine - coarse) / 3.0;
    (r, (r - fine).abs())
}

/// Draws a configuration with every electron in the ball of `radius`,
/// at least `min_sep` from the nucleus and from each other.
pub fn random_regular_configuration(rng: &mut impl Rng, n: usize, radius: f64, min_sep: f64) -> Configuration {
    loop {
        let coords: Vec<Vector3<f64>> = (0..n)
            .map(|_| loop {
                let v = Vector3::new(
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                );
                if v.norm() <= radius && v.norm() >= min_sep {
                    break v;
                }
            })
            .collect();
        let separated = (0..n).all(|i| ((i + 1)..n).all(|j| (coords[i] - coords[j]).norm() >= min_sep));
        if separated {
            return Configuration::new(coords);
        }
    }
}

/// One identity evaluated at one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub identity: &'static str,
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, 1)`.
    pub residual: f64,
}

/// Worst analytic-versus-difference Hessian entry of `F_cut` at one
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialRow {
    pub sample: usize,
    pub entry: (usize, usize),
    pub analytic: f64,
    pub finite_difference: f64,
    /// `|analytic - fd| / max(|analytic|, 1)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JastrowSuite {
    pub n_electrons: usize,
    pub identities: Vec<IdentityRow>,
    pub partials: Vec<PartialRow>,
}

impl JastrowSuite {
    pub fn max_identity_residual(&self) -> f64 {
        self.identities.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn max_partial_residual(&self) -> f64 {
        self.partials.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Settings for [`identity_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSettings {
    pub samples: usize,
    pub seed: u64,
    /// Electrons are drawn from the ball of this radius, so that the
    /// cutoff transition is exercised.
    pub radius: f64,
    pub min_separation: f64,
    pub fd_step: f64,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings {
            samples: 20,
            seed: 0,
            radius: 2.5,
            min_separation: 0.2,
            fd_step: 2e-3,
        }
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Both contraction identities and the full `F_cut` Hessian against
/// finite differences at random regular configurations.
pub fn identity_suite(model: &WavefunctionModel, settings: &SuiteSettings) -> Result<JastrowSuite> {
    let n = model.n_electrons();
    let charge = model.charge();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let configs: Vec<Configuration> = (0..settings.samples)
        .map(|_| random_regular_configuration(&mut rng, n, settings.radius, settings.min_separation))
        .collect();
    let mut identities = Vec::new();
    let mut partials = Vec::new();
    let cut = CutoffFn::default();
    for (s, c) in configs.iter().enumerate() {
        for (name, (lhs, rhs)) in [
            ("f2-contraction", contracted_f2_identity(model, c)?),
            ("f3-log-contraction", f3_log_contraction(model, c)?),
        ] {
            identities.push(IdentityRow {
                identity: name,
                sample: s,
                lhs,
                rhs,
                residual: relative(lhs, rhs),
            });
        }
        let analytic = fcut_derivatives(c, charge, &cut)?.hessian;
        let flat = c.to_flat();
        let value = |y: &[f64]| {
            let c = Configuration::from_flat(y).expect("flat length is a multiple of 3");
            f2_with(&c, charge, Some(&cut)) + f3_with(&c, charge, Some(&cut))
        };
        let mut worst: Option<PartialRow> = None;
        for a in 0..3 * n {
            for b in a..3 * n {
                let (fd, _) = fd_second_partial(value, &flat, a, b, settings.fd_step);
                let row = PartialRow {
                    sample: s,
                    entry: (a, b),
                    analytic: analytic[(a, b)],
                    finite_difference: fd,
                    residual: relative(analytic[(a, b)], fd),
                };
                if worst.as_ref().is_none_or(|w| row.residual > w.residual) {
                    worst = Some(row);
                }
            }
        }
        partials.extend(worst);
    }
    Ok(JastrowSuite {
        n_electrons: n,
        identities,
        partials,
    })
}

/// Sampled sup-norm ratio of the a priori estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriEstimate {
    pub samples: usize,
    /// `sup |∂²ψ - ψ∂²F_cut|` over the inner ball, max over index pairs.
    pub residual_sup: f64,
    /// `sup |∂²ψ|` over the same samples.
    pub raw_sup: f64,
    /// `sup |ψ|` over the outer ball.
    pub psi_sup: f64,
    pub ratio: f64,
    pub notice: Option<String>,
}

/// A point at volume fraction `fraction` of the ball, in a random direction.
fn ball_point(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, fraction: f64) -> Vec<f64> {
    let d = center.len();
    let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = radius * fraction.powf(1.0 / d as f64);
    center.iter().zip(&dir).map(|(c, v)| c + r * v / norm).collect()
}

/// `count` points stratified in the volume coordinate: point `i` sits at
/// volume fraction `(i + ½)/count` in a random direction, so the innermost
/// point approaches the center like `count^{-1/d}`.
fn draw_ball(seed: u64, stream: u64, center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count)
        .map(|i| ball_point(&mut rng, center, radius, (i as f64 + 0.5) / count as f64))
        .collect()
}

/// Max over entries of `|∂²ψ - ψ∂²F_cut|` and of `|∂²ψ|` at one point;
/// `None` on the singular set.
fn apriori_point(model: &WavefunctionModel, flat: &[f64]) -> Result<Option<(f64, f64)>> {
    let c = Configuration::from_flat(flat)?;
    let fcut = match fcut_derivatives(&c, model.charge(), &CutoffFn::default()) {
        Ok(d) => d.hessian,
        Err(CuspError::SingularPoint(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let hpsi = match model.hessian(&c) {
        Ok(h) => h,
        Err(CuspError::SingularPoint(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let psi = model.eval_psi(&c)?;
    let residual = (&hpsi - fcut * psi).amax();
    Ok(Some((residual, hpsi.amax())))
}

/// Sampled ratio `sup_{B(x0,R)} |∂²ψ - ψ∂²F_cut| / sup_{B(x0,R')} |ψ|`.
///
/// Both balls are sampled with radial stratification; `x0` itself is
/// included in the sup of `|ψ|`.
pub fn apriori_residual(
    model: &WavefunctionModel,
    x0: &Configuration,
    inner: f64,
    outer: f64,
    count: usize,
    seed: u64,
) -> Result<AprioriEstimate> {
    if !(inner > 0.0 && outer > inner) {
        return Err(CuspError::Domain(format!("need 0 < R < R', got {inner}, {outer}")));
    }
    if count == 0 {
        return Err(CuspError::Domain("sample count must be positive".into()));
    }
    if x0.n_electrons() != model.n_electrons() {
        return Err(CuspError::DimensionMismatch {
            expected: model.n_electrons(),
            got: x0.n_electrons(),
        });
    }
    let center = x0.to_flat();
    let inner_pts = draw_ball(seed, 0, &center, inner, count);
    let outer_pts = draw_ball(seed, 1, &center, outer, count);

    let per_point: Vec<Option<(f64, f64)>> = inner_pts
        .par_iter()
        .map(|p| apriori_point(model, p))
        .collect::<Result<_>>()?;
    let (residual_sup, raw_sup) = per_point
        .iter()
        .flatten()
        .fold((0.0f64, 0.0f64), |(a, b), &(r, h)| (a.max(r), b.max(h)));

    let psi_abs = |p: &Vec<f64>| -> Result<f64> { Ok(model.eval_psi(&Configuration::from_flat(p)?)?.abs()) };
    let mut psi_sup = model.eval_psi(x0)?.abs();
    for p in inner_pts.iter().chain(&outer_pts) {
        psi_sup = psi_sup.max(psi_abs(p)?);
    }

    let (ratio, notice) = if psi_sup == 0.0 {
        (0.0, Some("sup |psi| over the outer ball is zero; ratio reported as 0".to_string()))
    } else {
        (residual_sup / psi_sup, None)
    };
    Ok(AprioriEstimate {
        samples: count,
        residual_sup,
        raw_sup,
        psi_sup,
        ratio,
        notice,
    })
}

/// The estimate at `count` and `4·count` samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriRefinement {
    pub coarse: AprioriEstimate,
    pub fine: AprioriEstimate,
    /// `|ratio_fine / ratio_coarse - 1|` (0 when both ratios vanish).
    pub ratio_change: f64,
    /// `raw_sup_fine / raw_sup_coarse`.
    pub raw_growth: f64,
    /// The ratio grew by more than a factor of 10.
    pub unstable: bool,
}

pub fn apriori_refinement(
    model: &WavefunctionModel,
    x0: &Configuration,
    inner: f64,
    outer: f64,
    count: usize,
    seed: u64,
) -> Result<AprioriRefinement> {
    let coarse = apriori_residual(model, x0, inner, outer, count, seed)?;
    let fine = apriori_residual(model, x0, inner, outer, 4 * count, seed)?;
    let ratio_change = if coarse.ratio == 0.0 && fine.ratio == 0.0 {
        0.0
    } else {
        (fine.ratio / coarse.ratio - 1.0).abs()
    };
    let raw_growth = if coarse.raw_sup > 0.0 {
        fine.raw_sup / coarse.raw_sup
    } else {
        1.0
    };
    let unstable = fine.ratio > 10.0 * coarse.ratio;
    Ok(AprioriRefinement {
        coarse,
        fine,
        ratio_change,
        raw_growth,
        unstable,
    })
}

/// Lipschitz quotient of `∇φ₃` at one probe radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessRow {
    pub radius: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessTable {
    pub rows: Vec<SmoothnessRow>,
    /// The quotient at the smallest radius exceeds ten times the one at the
    /// largest.
    pub unbounded: bool,
}

const PROBE_DIRECTIONS: usize = 24;
const PROBE_SEED: u64 = 0x5eed;

/// `∇φ₃ = e^{-F}(∇ψ - ψ∇F)` with `F = F₂ + F₃`, and the size of the two
/// terms before they cancel.
fn grad_phi3(model: &WavefunctionModel, flat: &[f64]) -> Result<(DVector<f64>, f64)> {
    let c = Configuration::from_flat(flat)?;
    let cut = CutoffFn::default();
    let charge = model.charge();
    let d2 = derivatives(&c, charge, Part::F2, &cut)?;
    let d3 = derivatives(&c, charge, Part::F3, &cut)?;
    let psi = model.eval_psi(&c)?;
    let grad = model.eval_grad_psi(&c)?;
    let g = DVector::from_iterator(grad.len() * 3, grad.iter().flat_map(|v| v.iter().copied()));
    let damp = (-(d2.value + d3.value)).exp();
    let pulled = (d2.gradient + d3.gradient) * psi;
    let size = g.amax().max(pulled.amax()) * damp;
    Ok(((g - pulled) * damp, size))
}

/// Sup over fixed directions `e` of `|∇φ₃(c+ρe) - ∇φ₃(c-ρe)| / (2ρ)` for each
/// radius `ρ`; pairs straddle `center`.
pub fn phi3_smoothness_probe(model: &WavefunctionModel, center: &Configuration, radii: &[f64]) -> Result<SmoothnessTable> {
    if center.n_electrons() != model.n_electrons() {
        return Err(CuspError::DimensionMismatch {
            expected: model.n_electrons(),
            got: center.n_electrons(),
        });
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CuspError::Domain("probe radii must be positive and non-empty".into()));
    }
    let base = center.to_flat();
    let dim = base.len();
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let dirs: Vec<Vec<f64>> = (0..PROBE_DIRECTIONS)
        .map(|_| ball_point(&mut rng, &vec![0.0; dim], 1.0, 1.0))
        .collect();
    let mut rows = Vec::with_capacity(radii.len());
    let mut scale = 0.0f64;
    for &rho in radii {
        let mut q = 0.0f64;
        for d in &dirs {
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            let a: Vec<f64> = base.iter().zip(d).map(|(b, v)| b + rho * v / norm).collect();
            let b: Vec<f64> = base.iter().zip(d).map(|(b, v)| b - rho * v / norm).collect();
            let ((ga, sa), (gb, sb)) = (grad_phi3(model, &a)?, grad_phi3(model, &b)?);
            scale = scale.max(sa).max(sb);
            q = q.max((ga - gb).norm() / (2.0 * rho));
        }
        rows.push(SmoothnessRow { radius: rho, quotient: q });
    }
    let smallest = rows.iter().min_by(|x, y| x.radius.total_cmp(&y.radius)).unwrap();
    let largest = rows.iter().max_by(|x, y| x.radius.total_cmp(&y.radius)).unwrap();
    let floor = 1e-8 * scale.max(f64::MIN_POSITIVE);
    let unbounded = smallest.quotient > 10.0 * largest.quotient.max(floor);
    Ok(SmoothnessTable { rows, unbounded })
}

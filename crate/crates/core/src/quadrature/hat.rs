//! Integration over the hat coordinates `x̂_j ∈ R^{3N-3}` at a fixed `x`.
//!
//! * `N = 1`: the hat space is a point and the integral is an evaluation.
//! * `N = 2`: a deterministic product grid. For `x ≠ 0` the hat electron `y`
//!   is parametrized by `s = |y|`, `q = |x - y|` and an azimuth about `x̂`;
//!   the volume element `(s q / r) ds dq dφ` cancels both `1/|y|` and
//!   `1/|x - y|`. At `x = 0` the two singular points merge and plain polar
//!   coordinates with weight `s²` are used.
//! * `N ≥ 3` (or on request): importance-sampled Monte-Carlo.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::estimate::{pairwise_sum, Ensemble, IntegralEstimate, Method};
use super::gauss::GaussLegendre;
use super::monte_carlo::{summarize, HatSamples, McSampler};
use super::radial::truncation_radius;
use crate::error::{CuspError, Result};
use crate::wavefunction::AtomSpec;

/// Resolution of the two-electron product grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatGrid {
    pub radial_panels: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    pub azimuth_points: usize,
}

impl Default for HatGrid {
    fn default() -> Self {
        HatGrid {
            radial_panels: 24,
            radial_order: 10,
            angular_order: 12,
            azimuth_points: 8,
        }
    }
}

impl HatGrid {
    /// The coarser grid used for the error estimate.
    pub fn coarsened(&self) -> HatGrid {
        HatGrid {
            radial_panels: self.radial_panels,
            radial_order: self.radial_order.saturating_sub(4).max(2),
            angular_order: self.angular_order.saturating_sub(4).max(2),
            azimuth_points: (self.azimuth_points / 2).max(1),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.radial_panels == 0
            || self.radial_order == 0
            || self.angular_order == 0
            || self.azimuth_points == 0
        {
            return Err(CuspError::Config(format!(
                "hat grid sizes must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HatMethod {
    /// Grid for `N = 2`, Monte-Carlo for `N ≥ 3`.
    #[default]
    Auto,
    Grid,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatSettings {
    pub grid: HatGrid,
    pub sampler: McSampler,
    pub method: HatMethod,
}

/// A prepared hat integrator. Monte-Carlo plans hold one fixed sample set,
/// reused for every `x`, so estimates vary smoothly with `x`.
#[derive(Debug, Clone)]
pub enum HatPlan {
    Point,
    Grid {
        fine: HatGrid,
        coarse: HatGrid,
        s_max: f64,
    },
    MonteCarlo(HatSamples),
}

/// Component-wise results of a vector-valued hat integral.
#[derive(Debug, Clone)]
pub struct HatOutput {
    pub values: Vec<Ensemble>,
    pub n_evals: usize,
    /// Monte-Carlo samples whose weight exceeded the envelope bound.
    pub excursions: usize,
    /// Samples discarded because the integrand was not finite there.
    pub rejected: usize,
}

/// Which discretization of a [`HatPlan`] to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HatPass {
    Primary,
    Alternate,
}

/// Raw component vectors of one pass, per output.
#[derive(Debug, Clone)]
pub struct PassOutput {
    pub values: Vec<Vec<f64>>,
    pub n_evals: usize,
    pub excursions: usize,
    pub rejected: usize,
}

impl PassOutput {
    fn plain(values: Vec<Vec<f64>>, n_evals: usize) -> Self {
        PassOutput {
            values,
            n_evals,
            excursions: 0,
            rejected: 0,
        }
    }
}

impl HatPlan {
    /// `decay` is the slowest amplitude decay rate of the integrand's
    /// wavefunction; the grid truncates where `e^{-2·decay·s}` is negligible.
    pub fn new(n_electrons: usize, decay: f64, settings: &HatSettings) -> Result<Self> {
        if n_electrons == 1 {
            return Ok(HatPlan::Point);
        }
        let use_grid = match settings.method {
            HatMethod::Auto => n_electrons == 2,
            HatMethod::Grid => {
                if n_electrons != 2 {
                    return Err(CuspError::Config(format!(
                        "grid hat integration supports two electrons, got {n_electrons}"
                    )));
                }
                true
            }
            HatMethod::MonteCarlo => false,
        };
        if use_grid {
            settings.grid.validate()?;
            if !(decay > 0.0) {
                return Err(CuspError::Domain(format!("decay rate must be positive, got {decay}")));
            }
            Ok(HatPlan::Grid {
                fine: settings.grid,
                coarse: settings.grid.coarsened(),
                s_max: truncation_radius(2.0 * decay, 6),
            })
        } else {
            Ok(HatPlan::MonteCarlo(settings.sampler.draw(n_electrons - 1)?))
        }
    }

    pub fn method(&self) -> Method {
        match self {
            HatPlan::Point => Method::Exact,
            HatPlan::Grid { .. } => Method::TensorGrid,
            HatPlan::MonteCarlo(_) => Method::MonteCarlo,
        }
    }

    /// One discretization of the hat integral. The primary pass returns
    /// `[value]` or, for Monte-Carlo, `[mean, batch_1, ..]`; the alternate
    /// pass (coarse grid, or the plain mean) always returns `[value]`.
    pub fn integrate_pass(
        &self,
        x: &Vector3<f64>,
        k: usize,
        f: &dyn Fn(&[Vector3<f64>], &mut [f64]),
        pass: HatPass,
    ) -> Result<PassOutput> {
        match self {
            HatPlan::Point => {
                let mut out = vec![0.0; k];
                f(&[], &mut out);
                check_finite(&out, 0, "point evaluation")?;
                Ok(PassOutput::plain(out.into_iter().map(|v| vec![v]).collect(), 1))
            }
            HatPlan::Grid { fine, coarse, s_max } => {
                let grid = match pass {
                    HatPass::Primary => fine,
                    HatPass::Alternate => coarse,
                };
                let (v, n) = grid_pass(x, k, f, grid, *s_max)?;
                Ok(PassOutput::plain(v.into_iter().map(|v| vec![v]).collect(), n))
            }
            HatPlan::MonteCarlo(samples) => {
                let out = monte_carlo_pass(k, f, samples)?;
                let values = out
                    .values
                    .into_iter()
                    .map(|e| match pass {
                        HatPass::Primary => e.values,
                        HatPass::Alternate => vec![e.values[0]],
                    })
                    .collect();
                Ok(PassOutput {
                    values,
                    n_evals: out.n_evals,
                    excursions: out.excursions,
                    rejected: out.rejected,
                })
            }
        }
    }

    /// Integrates the `k` outputs of `f(hat, out)` over the hat space at `x`.
    pub fn integrate(
        &self,
        x: &Vector3<f64>,
        k: usize,
        f: &dyn Fn(&[Vector3<f64>], &mut [f64]),
    ) -> Result<HatOutput> {
        match self {
            HatPlan::Point => {
                let mut out = vec![0.0; k];
                f(&[], &mut out);
                check_finite(&out, 0, "point evaluation")?;
                Ok(HatOutput {
                    values: out.into_iter().map(Ensemble::exact).collect(),
                    n_evals: 1,
                    excursions: 0,
                    rejected: 0,
                })
            }
            HatPlan::Grid { fine, coarse, s_max } => {
                let (a, na) = grid_pass(x, k, f, fine, *s_max)?;
                let (b, nb) = grid_pass(x, k, f, coarse, *s_max)?;
                Ok(HatOutput {
                    values: a.into_iter().zip(b).map(|(p, q)| Ensemble::nested(p, q)).collect(),
                    n_evals: na + nb,
                    excursions: 0,
                    rejected: 0,
                })
            }
            HatPlan::MonteCarlo(samples) => monte_carlo_pass(k, f, samples),
        }
    }
}

fn check_finite(v: &[f64], node: usize, context: &str) -> Result<()> {
    if let Some(bad) = v.iter().position(|x| !x.is_finite()) {
        return Err(CuspError::NonFinite {
            node,
            context: format!("{context}, output {bad}"),
        });
    }
    Ok(())
}

/// Orthonormal `(e1, e2)` completing `axis`.
fn frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (helper - axis * axis.dot(&helper)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

fn s_panels(r: f64, s_max: f64, panels: usize) -> Vec<(f64, f64)> {
    let width = s_max / panels as f64;
    let mut edges = vec![0.0];
    if r > 0.0 && r < s_max {
        let inner = ((r / width).ceil() as usize).max(1);
        for i in 1..=inner {
            edges.push(r * i as f64 / inner as f64);
        }
        let outer = (((s_max - r) / width).ceil() as usize).max(1);
        for i in 1..=outer {
            edges.push(r + (s_max - r) * i as f64 / outer as f64);
        }
    } else {
        for i in 1..=panels {
            edges.push(s_max * i as f64 / panels as f64);
        }
    }
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

fn grid_pass(
    x: &Vector3<f64>,
    k: usize,
    f: &dyn Fn(&[Vector3<f64>], &mut [f64]),
    grid: &HatGrid,
    s_max: f64,
) -> Result<(Vec<f64>, usize)> {
    let r = x.norm();
    let gs = GaussLegendre::new(grid.radial_order);
    let ga = GaussLegendre::new(grid.angular_order);
    let m = grid.azimuth_points;
    let dphi = 2.0 * PI / m as f64;
    let azimuths: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let p = dphi * (i as f64 + 0.5);
            (p.cos(), p.sin())
        })
        .collect();
    let axis = if r > 0.0 { x / r } else { Vector3::z() };
    let (e1, e2) = frame(&axis);

    let mut per_node: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut out = vec![0.0; k];
    let mut node = 0usize;
    for (lo, hi) in s_panels(r, s_max, grid.radial_panels) {
        for (s, ws) in gs.mapped(lo, hi) {
            // inner nodes: (cos θ, sin θ, weight including the Jacobian)
            let inner: Vec<(f64, f64, f64)> = if r > 0.0 {
                let qa = (r - s).abs();
                let qb = r + s;
                ga.mapped(qa, qb)
                    .map(|(q, wq)| {
                        let c = ((r * r + s * s - q * q) / (2.0 * r * s)).clamp(-1.0, 1.0);
                        (c, (1.0 - c * c).max(0.0).sqrt(), wq * s * q / r)
                    })
                    .collect()
            } else {
                ga.mapped(-1.0, 1.0)
                    .map(|(c, wc)| (c, (1.0 - c * c).max(0.0).sqrt(), wc * s * s))
                    .collect()
            };
            let mut acc = vec![0.0; k];
            for &(c, sn, w) in &inner {
                for &(cp, sp) in &azimuths {
                    let y = (axis * c + (e1 * cp + e2 * sp) * sn) * s;
                    f(&[y], &mut out);
                    check_finite(&out, node, "two-electron hat grid")?;
                    node += 1;
                    for (a, v) in acc.iter_mut().zip(&out) {
                        *a += w * v;
                    }
                }
            }
            for (dst, a) in per_node.iter_mut().zip(acc) {
                dst.push(ws * dphi * a);
            }
        }
    }
    Ok((per_node.iter().map(|v| pairwise_sum(v)).collect(), node))
}

fn monte_carlo_pass(
    k: usize,
    f: &dyn Fn(&[Vector3<f64>], &mut [f64]),
    samples: &HatSamples,
) -> Result<HatOutput> {
    let n = samples.points.len();
    let mut ratios: Vec<Vec<f64>> = vec![Vec::with_capacity(n); k];
    let mut out = vec![0.0; k];
    let mut rejected = 0usize;
    for (pts, p) in samples.points.iter().zip(&samples.density) {
        f(pts, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            // only reachable on the measure-zero singular set
            rejected += 1;
            for r in ratios.iter_mut() {
                r.push(0.0);
            }
            continue;
        }
        for (r, v) in ratios.iter_mut().zip(&out) {
            r.push(v / p);
        }
    }
    let mut excursions = 0;
    let values = ratios
        .iter()
        .map(|r| {
            let st = summarize(r, samples.batches);
            excursions = excursions.max(st.excursions);
            Ensemble::batches(st.mean, st.batch_means)
        })
        .collect();
    Ok(HatOutput {
        values,
        n_evals: n,
        excursions,
        rejected,
    })
}

/// Excursions at or above this count trigger the envelope-misfit note.
pub const EXCURSION_LIMIT: usize = 3;

/// Scalar hat integral of `f` at `x` with method chosen by `settings`.
/// The grid truncation and the default sampler both follow the sampler's
/// envelope rate.
pub fn integrate_hat(
    f: impl Fn(&[Vector3<f64>]) -> f64,
    spec: &AtomSpec,
    x: &Vector3<f64>,
    settings: &HatSettings,
) -> Result<IntegralEstimate> {
    let plan = HatPlan::new(spec.n_electrons, settings.sampler.envelope_rate, settings)?;
    let out = plan.integrate(x, 1, &|hat, o| o[0] = f(hat))?;
    let mut est = out.values[0].to_estimate(plan.method(), out.n_evals);
    if out.excursions >= EXCURSION_LIMIT {
        est = est.with_note(format!(
            "envelope misfit: {} samples exceeded the envelope bound",
            out.excursions
        ));
    }
    if out.rejected > 0 {
        est = est.with_note(format!("{} samples on the singular set counted as zero", out.rejected));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(method: HatMethod, n: usize) -> HatSettings {
        HatSettings {
            grid: HatGrid::default(),
            sampler: McSampler::new(11, n, 1.0),
            method,
        }
    }

    fn he_spec() -> AtomSpec {
        AtomSpec::new(2, 2.0, -1.375, -1.0).unwrap()
    }

    #[test]
    fn point_evaluation_for_one_electron() {
        let spec = AtomSpec::hydrogenic(1, 1.0).unwrap();
        let e = integrate_hat(|h| {
            assert!(h.is_empty());
            0.3
        }, &spec, &Vector3::zeros(), &settings(HatMethod::Auto, 10))
        .unwrap();
        assert_eq!(e.value, 0.3);
        assert_eq!(e.error, 0.0);
    }

    #[test]
    fn normalized_density_integrates_to_one() {
        // ∫ (κ³/8π) e^{-κ|y|} dy = 1 with κ = 2
        let dens = |h: &[Vector3<f64>]| 8.0 / (8.0 * PI) * (-2.0 * h[0].norm()).exp();
        for x in [Vector3::zeros(), Vector3::new(0.0, 1e-3, 0.0), Vector3::new(0.7, -0.4, 1.3)] {
            let e = integrate_hat(dens, &he_spec(), &x, &settings(HatMethod::Grid, 1)).unwrap();
            assert!((e.value - 1.0).abs() < 1e-12, "{x:?}: {}", e.value);
        }
    }

    #[test]
    fn coulomb_factors_are_resolved() {
        // Hartree potential of the unit charge ρ(y) = e^{-2|y|}/π:
        // V(r) = 1/r - e^{-2r}(1/r + 1)
        let x = Vector3::new(0.3, 0.2, -0.5);
        let r = x.norm();
        let e = integrate_hat(
            |h| (-2.0 * h[0].norm()).exp() / PI / (x - h[0]).norm(),
            &he_spec(),
            &x,
            &settings(HatMethod::Grid, 1),
        )
        .unwrap();
        let want = 1.0 / r - (-2.0 * r).exp() * (1.0 / r + 1.0);
        assert!((e.value - want).abs() < 1e-11, "{} vs {want}", e.value);
        let nuc = integrate_hat(
            |h| (-2.0 * h[0].norm()).exp() / PI / h[0].norm(),
            &he_spec(),
            &x,
            &settings(HatMethod::Grid, 1),
        )
        .unwrap();
        // ⟨1/|y|⟩ = 1 for e^{-2|y|}/π
        assert!((nuc.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn grid_and_monte_carlo_agree() {
        let x = Vector3::new(0.0, 0.0, 0.4);
        let f = |h: &[Vector3<f64>]| (-2.0 * h[0].norm()).exp() / PI / (x - h[0]).norm();
        let g = integrate_hat(f, &he_spec(), &x, &settings(HatMethod::Grid, 1)).unwrap();
        let m = integrate_hat(f, &he_spec(), &x, &settings(HatMethod::MonteCarlo, 50_000)).unwrap();
        assert_eq!(m.method, Method::MonteCarlo);
        assert!((g.value - m.value).abs() <= 3.0 * (g.error + m.error), "{g:?} {m:?}");
    }

    #[test]
    fn three_electrons_use_monte_carlo() {
        let spec = AtomSpec::new(3, 3.0, -2.0, -1.5).unwrap();
        let e = integrate_hat(
            |h| {
                assert_eq!(h.len(), 2);
                let k: f64 = 2.0;
                (k.powi(3) / (8.0 * PI)).powi(2) * (-k * (h[0].norm() + h[1].norm())).exp()
            },
            &spec,
            &Vector3::zeros(),
            &settings(HatMethod::Auto, 4096),
        )
        .unwrap();
        // integrand equals the sampling density: every ratio is 1
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(e.error < 1e-12);
    }

    #[test]
    fn grid_rejects_three_electrons() {
        let spec = AtomSpec::new(3, 3.0, -2.0, -1.5).unwrap();
        let r = integrate_hat(|_| 1.0, &spec, &Vector3::zeros(), &settings(HatMethod::Grid, 1));
        assert!(matches!(r, Err(CuspError::Config(_))));
    }
}

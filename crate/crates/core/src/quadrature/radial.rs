//! Adaptive composite Gauss-Legendre integration on an interval.

use super::estimate::{pairwise_sum, IntegralEstimate, Method};
use super::gauss::GaussLegendre;
use crate::error::{CuspError, Result};

const ORDER: usize = 10;
const MAX_PANELS: usize = 4096;

/// Tolerances for [`integrate_interval`].
#[derive(Debug, Clone, Copy)]
pub struct RadialTolerance {
    pub relative: f64,
    pub absolute: f64,
    pub initial_panels: usize,
}

impl Default for RadialTolerance {
    fn default() -> Self {
        RadialTolerance {
            relative: 1e-12,
            absolute: 1e-300,
            initial_panels: 4,
        }
    }
}

/// `∫₀^r f(s) ds` by adaptive bisection of Gauss-Legendre panels.
pub fn integrate_radial(f: impl Fn(f64) -> f64, r: f64) -> Result<IntegralEstimate> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(CuspError::Domain(format!(
            "radial upper limit must be finite and nonnegative, got {r}"
        )));
    }
    integrate_interval(f, 0.0, r, RadialTolerance::default())
}

/// `∫_a^b f(s) ds`. Each panel is compared against its two halves; a panel is
/// accepted once the difference drops below its share of the tolerance. The
/// reported error is the sum of those differences.
pub fn integrate_interval(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: RadialTolerance,
) -> Result<IntegralEstimate> {
    if a == b {
        return Ok(IntegralEstimate::new(0.0, 0.0, Method::Adaptive, 0));
    }
    let rule = GaussLegendre::new(ORDER);
    let mut evals = 0usize;
    let panel = |lo: f64, hi: f64, evals: &mut usize| -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in rule.mapped(lo, hi) {
            let v = f(x);
            if !v.is_finite() {
                return Err(CuspError::integration(
                    "radial integral",
                    format!("non-finite integrand at s = {x}"),
                ));
            }
            acc += w * v;
        }
        *evals += rule.len();
        Ok(acc)
    };

    let n0 = tol.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut work: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let whole = panel(lo, hi, &mut evals)?;
        work.push((lo, hi, whole));
    }
    let coarse_total: f64 = work.iter().map(|p| p.2).sum();
    let scale = coarse_total.abs().max(tol.absolute);

    let mut accepted: Vec<(f64, f64, f64)> = Vec::new();
    let mut panels_used = n0;
    while let Some((lo, hi, whole)) = work.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid, &mut evals)?;
        let right = panel(mid, hi, &mut evals)?;
        let refined = left + right;
        let diff = (refined - whole).abs();
        let share = (hi - lo) / (b - a).abs();
        if diff <= tol.relative * scale * share || diff <= tol.absolute || mid == lo || mid == hi {
            accepted.push((lo, refined, diff));
            continue;
        }
        panels_used += 1;
        if panels_used > MAX_PANELS {
            return Err(CuspError::integration(
                "radial integral",
                format!("no convergence on [{a}, {b}] after {MAX_PANELS} panels"),
            ));
        }
        work.push((mid, hi, right));
        work.push((lo, mid, left));
    }
    // deterministic order independent of refinement history
    accepted.sort_by(|p, q| p.0.total_cmp(&q.0));
    let values: Vec<f64> = accepted.iter().map(|p| p.1).collect();
    let errors: Vec<f64> = accepted.iter().map(|p| p.2).collect();
    Ok(IntegralEstimate::new(
        pairwise_sum(&values),
        pairwise_sum(&errors),
        Method::Adaptive,
        evals,
    ))
}

/// Upper limit beyond which `e^{-rate·s}` stays below `1e-16` of its peak,
/// with headroom for a polynomial prefactor of the given degree.
pub fn truncation_radius(rate: f64, poly_degree: u32) -> f64 {
    let base = 16.0 * std::f64::consts::LN_10;
    (base + 2.0 * poly_degree as f64 * (1.0 + poly_degree as f64).ln() + 10.0) / rate
}

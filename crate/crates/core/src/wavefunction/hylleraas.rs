//! Two-electron Hylleraas expansions `e^{-α s}·Σ c·s^a t^{2b} u^c` with
//! `s = r₁ + r₂`, `t = r₁ - r₂`, `u = |x₁ - x₂|`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{CuspError, Result};
use crate::quadrature::gauss::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HylleraasTerm {
    pub coef: f64,
    /// Power of `s`.
    #[serde(default)]
    pub s: u32,
    /// Half the power of `t` (only even powers keep the exchange symmetry).
    #[serde(default)]
    pub t2: u32,
    /// Power of `u`.
    #[serde(default)]
    pub u: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hylleraas {
    pub alpha: f64,
    pub terms: Vec<HylleraasTerm>,
}

/// `P` and its partials at `(s, t, u)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolyJet {
    pub p: f64,
    pub ps: f64,
    pub pt: f64,
    pub pu: f64,
}

fn pw(x: f64, k: u32) -> f64 {
    x.powi(k as i32)
}

impl Hylleraas {
    pub fn new(alpha: f64, terms: Vec<HylleraasTerm>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(CuspError::UnsupportedModel(format!(
                "Hylleraas exponent must be positive, got {alpha}"
            )));
        }
        if terms.is_empty() {
            return Err(CuspError::UnsupportedModel(
                "Hylleraas expansion has no terms".into(),
            ));
        }
        Ok(Hylleraas { alpha, terms })
    }

    pub(crate) fn poly(&self, s: f64, t: f64, u: f64) -> PolyJet {
        let mut j = PolyJet {
            p: 0.0,
            ps: 0.0,
            pt: 0.0,
            pu: 0.0,
        };
        for term in &self.terms {
            let (a, b2, c) = (term.s, 2 * term.t2, term.u);
            let fs = pw(s, a);
            let ft = pw(t, b2);
            let fu = pw(u, c);
            j.p += term.coef * fs * ft * fu;
            if a > 0 {
                j.ps += term.coef * a as f64 * pw(s, a - 1) * ft * fu;
            }
            if b2 > 0 {
                j.pt += term.coef * b2 as f64 * fs * pw(t, b2 - 1) * fu;
            }
            if c > 0 {
                j.pu += term.coef * c as f64 * fs * ft * pw(u, c - 1);
            }
        }
        j
    }

    /// `e^{shift·r_j}·ψ_raw` at the given pair of positions.
    pub(crate) fn value_shifted(&self, x1: &Vector3<f64>, x2: &Vector3<f64>, slot: usize, shift: f64) -> f64 {
        let r1 = x1.norm();
        let r2 = x2.norm();
        let u = (x1 - x2).norm();
        let j = self.poly(r1 + r2, r1 - r2, u);
        let (ra, rb) = if slot == 0 { (r1, r2) } else { (r2, r1) };
        (-(self.alpha - shift) * ra - self.alpha * rb).exp() * j.p
    }

    /// Gradient in each slot of `e^{shift·r_slot}·ψ_raw`. The gradient of slot
    /// `k` is only formed when `want[k]`; singular positions are errors only
    /// for requested slots.
    pub(crate) fn gradient_shifted(
        &self,
        x1: &Vector3<f64>,
        x2: &Vector3<f64>,
        slot: usize,
        shift: f64,
        want: [bool; 2],
    ) -> Result<[Vector3<f64>; 2]> {
        let r1 = x1.norm();
        let r2 = x2.norm();
        let d = x1 - x2;
        let u = d.norm();
        let j = self.poly(r1 + r2, r1 - r2, u);
        let (a1, a2) = if slot == 0 {
            (self.alpha - shift, self.alpha)
        } else {
            (self.alpha, self.alpha - shift)
        };
        let e = (-a1 * r1 - a2 * r2).exp();
        let d1 = e * (-a1 * j.p + j.ps + j.pt);
        let d2 = e * (-a2 * j.p + j.ps - j.pt);
        let du = e * j.pu;
        let mut out = [Vector3::zeros(), Vector3::zeros()];
        for (k, (r, x, dr, sign)) in [(r1, x1, d1, 1.0), (r2, x2, d2, -1.0)].into_iter().enumerate() {
            if !want[k] {
                continue;
            }
            if r == 0.0 {
                return Err(CuspError::SingularPoint(format!(
                    "Hylleraas gradient at the nucleus in slot {}",
                    k + 1
                )));
            }
            if u == 0.0 && du != 0.0 {
                return Err(CuspError::SingularPoint(
                    "Hylleraas gradient at an electron coincidence".into(),
                ));
            }
            let pair = if u == 0.0 { Vector3::zeros() } else { d * (sign * du / u) };
            out[k] = x * (dr / r) + pair;
        }
        Ok(out)
    }

    /// Limit at `x_slot = 0` of the gradient of `e^{(Z/2) r_slot}ψ_raw` in that slot.
    pub(crate) fn regularized_gradient_at_origin(
        &self,
        other: &Vector3<f64>,
        shift: f64,
    ) -> Result<Vector3<f64>> {
        let r = other.norm();
        // with x₁ = 0: s = r, t = -r, u = r; P is even in t, so the other slot
        // gives the same coefficient
        let j = self.poly(r, -r, r);
        let radial = (shift - self.alpha) * j.p + j.ps + j.pt;
        let scale = j.p.abs().max(j.ps.abs()).max(j.pt.abs()).max(1e-300);
        if radial.abs() > 1e-12 * scale * (1.0 + self.alpha) {
            return Err(CuspError::UnsupportedModel(format!(
                "regularized Hylleraas factor has radial slope {radial:.3e} at the nucleus"
            )));
        }
        if r == 0.0 {
            if j.pu != 0.0 {
                return Err(CuspError::SingularPoint(
                    "both electrons at the nucleus".into(),
                ));
            }
            return Ok(Vector3::zeros());
        }
        // (x - x_other)/u at x = 0 is -x̂_other
        Ok(-other / r * ((-self.alpha * r).exp() * j.pu))
    }

    /// `∫∫ Φ² dx₁dx₂` in `(s, t, u)` coordinates:
    /// `π² ∫₀^∞ ds ∫_{-s}^{s} dt ∫_{|t|}^{s} du (s² - t²) u Φ²`.
    pub fn norm_squared(&self) -> f64 {
        let deg_s: u32 = self.terms.iter().map(|t| t.s + 2 * t.t2 + t.u).max().unwrap_or(0);
        let rate = 2.0 * self.alpha;
        let s_max = crate::quadrature::radial::truncation_radius(rate, 2 * deg_s + 5);
        let n_inner = (deg_s as usize + 4).max(8);
        let inner = GaussLegendre::new(n_inner);
        let outer = GaussLegendre::new(16);
        let panels = 48;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = s_max * p as f64 / panels as f64;
            let hi = s_max * (p + 1) as f64 / panels as f64;
            for (s, ws) in outer.mapped(lo, hi) {
                let e = (-rate * s).exp();
                // t ∈ [0, s] and doubled: Φ² is even in t
                let mut acc_t = 0.0;
                for (t, wt) in inner.mapped(0.0, s) {
                    let mut acc_u = 0.0;
                    for (u, wu) in inner.mapped(t, s) {
                        let j = self.poly(s, t, u);
                        acc_u += wu * u * j.p * j.p;
                    }
                    acc_t += wt * (s * s - t * t) * acc_u;
                }
                total += ws * e * 2.0 * acc_t;
            }
        }
        PI * PI * total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_exponential_norm() {
        // ∫ e^{-2α r} d³x = π/α³ per electron
        let h = Hylleraas::new(
            1.3,
            vec![HylleraasTerm {
                coef: 1.0,
                s: 0,
                t2: 0,
                u: 0,
            }],
        )
        .unwrap();
        let want = (PI / 1.3f64.powi(3)).powi(2);
        assert!((h.norm_squared() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_term_norm_matches_separable_moment() {
        // ∫∫ u² e^{-2α(r1+r2)} = 2·(π/α³)·⟨r²⟩·(π/α³) with ⟨r²⟩ = 3/α² for e^{-2αr}
        let a: f64 = 0.9;
        let h = Hylleraas::new(
            a,
            vec![HylleraasTerm {
                coef: 1.0,
                s: 0,
                t2: 0,
                u: 1,
            }],
        )
        .unwrap();
        let single = PI / a.powi(3);
        let want = 2.0 * single * single * 3.0 / (a * a);
        assert!((h.norm_squared() / want - 1.0).abs() < 1e-11, "{}", h.norm_squared() / want);
    }
}

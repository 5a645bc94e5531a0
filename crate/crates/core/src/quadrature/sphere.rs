//! Octahedrally symmetric quadrature rules on the unit sphere.
//!
//! Nodes are generated from orbits of the octahedral group acting on a
//! handful of generator points. Weights here are stored normalized to 1 and
//! rescaled to the surface measure `4π` on construction.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::estimate::{IntegralEstimate, Method};
use crate::error::{CuspError, Result};

/// Polynomial degrees of the shipped rules.
pub const SHIPPED_DEGREES: [u32; 4] = [3, 7, 17, 29];

/// Orbit generators (octahedral group, with inversion).
#[derive(Debug, Clone, Copy)]
enum Orbit {
    /// `(1, 0, 0)`: 6 points.
    Axes,
    /// `(0, 1, 1)/√2`: 12 points.
    Edges,
    /// `(1, 1, 1)/√3`: 8 points.
    Vertices,
    /// `(a, a, b)`, `b = √(1 - 2a²)`: 24 points.
    Diagonal(f64),
    /// `(a, b, 0)`, `b = √(1 - a²)`: 24 points.
    Planar(f64),
    /// `(a, b, c)`, `c = √(1 - a² - b²)`: 48 points.
    General(f64, f64),
}

// (orbit, normalized weight)
const DEGREE_3: &[(Orbit, f64)] = &[(Orbit::Axes, 1.0 / 6.0)];

const DEGREE_7: &[(Orbit, f64)] = &[
    (Orbit::Axes, 1.0 / 21.0),
    (Orbit::Edges, 4.0 / 105.0),
    (Orbit::Vertices, 9.0 / 280.0),
];

const DEGREE_17: &[(Orbit, f64)] = &[
    (Orbit::Axes, 0.003_828_270_494_937_161_5),
    (Orbit::Vertices, 0.009_793_737_512_487_513),
    (Orbit::Diagonal(0.185_115_635_344_736_16), 0.008_211_737_283_191_111),
    (Orbit::Diagonal(0.690_421_048_382_292_1), 0.009_942_814_891_178_103),
    (Orbit::Diagonal(0.395_689_473_055_941_93), 0.009_595_471_336_070_962),
    (Orbit::Planar(0.478_369_028_812_150_2), 0.009_694_996_361_663_029),
];

const DEGREE_29: &[(Orbit, f64)] = &[
    (Orbit::Axes, 0.000_854_591_172_512_814_8),
    (Orbit::Vertices, 0.003_599_119_285_025_571_3),
    (Orbit::Diagonal(0.351_564_034_557_010_5), 0.003_449_788_424_305_883_5),
    (Orbit::Diagonal(0.656_632_941_021_961_1), 0.003_604_822_601_419_882),
    (Orbit::Diagonal(0.472_905_413_258_100_5), 0.003_576_729_661_743_367),
    (Orbit::Diagonal(0.096_183_085_226_147_84), 0.002_352_101_413_689_164),
    (Orbit::Diagonal(0.221_964_523_629_417_85), 0.003_108_953_122_413_675_4),
    (Orbit::Diagonal(0.701_176_641_608_954_4), 0.003_650_045_807_677_255_6),
    (Orbit::Planar(0.264_415_288_706_066_23), 0.002_982_344_963_171_803_7),
    (Orbit::Planar(0.571_895_589_187_896_1), 0.003_600_820_932_216_46),
    (
        Orbit::General(0.251_003_475_177_046_5, 0.800_072_749_407_395_1),
        0.003_571_540_554_273_387,
    ),
    (
        Orbit::General(0.123_354_853_258_332_74, 0.412_772_408_316_853_1),
        0.003_392_312_205_006_170_2,
    ),
];

/// A symmetric rule `Σ w_i f(ω_i) ≈ ∫_{S²} f dω`.
#[derive(Debug, Clone)]
pub struct SphericalRule {
    degree: u32,
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
}

impl SphericalRule {
    /// One of the shipped rules, by polynomial degree.
    pub fn with_degree(degree: u32) -> Result<Self> {
        let table = match degree {
            3 => DEGREE_3,
            7 => DEGREE_7,
            17 => DEGREE_17,
            29 => DEGREE_29,
            _ => {
                return Err(CuspError::Domain(format!(
                    "no spherical rule of degree {degree}; shipped degrees are {SHIPPED_DEGREES:?}"
                )))
            }
        };
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for &(orbit, w) in table {
            let pts = orbit_points(orbit);
            weights.extend(std::iter::repeat_n(4.0 * PI * w, pts.len()));
            nodes.extend(pts);
        }
        Ok(SphericalRule {
            degree,
            nodes,
            weights,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The rule used for the nested error estimate: next higher degree, or
    /// the next lower one for the top rule.
    pub fn companion(&self) -> SphericalRule {
        let idx = SHIPPED_DEGREES
            .iter()
            .position(|&d| d == self.degree)
            .expect("shipped degree");
        let other = if idx + 1 < SHIPPED_DEGREES.len() {
            SHIPPED_DEGREES[idx + 1]
        } else {
            SHIPPED_DEGREES[idx - 1]
        };
        SphericalRule::with_degree(other).expect("shipped degree")
    }

    /// Plain weighted sum, no error estimate.
    pub fn apply(&self, mut f: impl FnMut(&Vector3<f64>) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| w * f(n))
            .collect();
        super::estimate::pairwise_sum(&terms)
    }
}

fn orbit_points(orbit: Orbit) -> Vec<Vector3<f64>> {
    let base = match orbit {
        Orbit::Axes => [1.0, 0.0, 0.0],
        Orbit::Edges => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            [0.0, a, a]
        }
        Orbit::Vertices => {
            let a = 1.0 / 3f64.sqrt();
            [a, a, a]
        }
        Orbit::Diagonal(a) => [a, a, (1.0 - 2.0 * a * a).sqrt()],
        Orbit::Planar(a) => [a, (1.0 - a * a).sqrt(), 0.0],
        Orbit::General(a, b) => [a, b, (1.0 - a * a - b * b).sqrt()],
    };
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out: Vec<Vector3<f64>> = Vec::new();
    for perm in PERMS {
        for signs in 0..8u32 {
            let mut v = [0.0; 3];
            for (k, slot) in v.iter_mut().enumerate() {
                let s = if signs & (1 << k) != 0 { -1.0 } else { 1.0 };
                *slot = s * base[perm[k]];
            }
            let p = Vector3::from(v);
            if !out.iter().any(|q| (q - p).norm() < 1e-12) {
                out.push(p);
            }
        }
    }
    out
}

/// `∫_{S²} f dω` with the given rule; the error is the difference against
/// the companion rule.
pub fn sphere_integrate(
    f: impl Fn(&Vector3<f64>) -> f64,
    rule: &SphericalRule,
) -> Result<IntegralEstimate> {
    let companion = rule.companion();
    let eval = |r: &SphericalRule| -> Result<f64> {
        let mut terms = Vec::with_capacity(r.len());
        for (i, (n, w)) in r.nodes().iter().zip(r.weights()).enumerate() {
            let v = f(n);
            if !v.is_finite() {
                return Err(CuspError::NonFinite {
                    node: i,
                    context: format!(
                        "sphere rule degree {} at ({:.6}, {:.6}, {:.6})",
                        r.degree(),
                        n.x,
                        n.y,
                        n.z
                    ),
                });
            }
            terms.push(w * v);
        }
        Ok(super::estimate::pairwise_sum(&terms))
    };
    let value = eval(rule)?;
    let alt = eval(&companion)?;
    Ok(IntegralEstimate::new(
        value,
        (value - alt).abs(),
        Method::TensorGrid,
        rule.len() + companion.len(),
    ))
}

/// `∫_{S²} ω·(Aω) dω`.
pub fn sphere_moment_matrix(a: &Matrix3<f64>, rule: &SphericalRule) -> f64 {
    rule.apply(|w| w.dot(&(a * w)))
}

/// Worst absolute residuals of the second-moment identities for one rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentResiduals {
    pub degree: u32,
    pub nodes: usize,
    /// `∫(ω·a)(ω·b) - (4π/3) a·b` over random vector pairs.
    pub dot_product: f64,
    /// `∫ω·(Aω) - (4π/3) Tr A` over random general and symmetric `A`.
    pub trace: f64,
    /// `∫ω·(Aω)` for random antisymmetric `A`.
    pub antisymmetric: f64,
    /// `∫ω_i ω_j - (4π/3) δ_ij` over all index pairs.
    pub second_moments: f64,
}

impl MomentResiduals {
    pub fn max(&self) -> f64 {
        self.dot_product
            .max(self.trace)
            .max(self.antisymmetric)
            .max(self.second_moments)
    }
}

/// Second-moment residuals of `rule` on `trials` random vectors and
/// matrices with entries in `[-1, 1]`.
pub fn moment_residuals(rule: &SphericalRule, trials: usize, seed: u64) -> MomentResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let third = 4.0 * PI / 3.0;
    let mut out = MomentResiduals {
        degree: rule.degree(),
        nodes: rule.len(),
        dot_product: 0.0,
        trace: 0.0,
        antisymmetric: 0.0,
        second_moments: 0.0,
    };
    for i in 0..3 {
        for j in 0..3 {
            let exact = if i == j { third } else { 0.0 };
            let got = rule.apply(|w| w[i] * w[j]);
            out.second_moments = out.second_moments.max((got - exact).abs());
        }
    }
    let mut unit = || rng.gen_range(-1.0..=1.0);
    for _ in 0..trials {
        let a = Vector3::new(unit(), unit(), unit());
        let b = Vector3::new(unit(), unit(), unit());
        let got = rule.apply(|w| w.dot(&a) * w.dot(&b));
        out.dot_product = out.dot_product.max((got - third * a.dot(&b)).abs());

        let m = Matrix3::from_fn(|_, _| unit());
        for a in [m, m + m.transpose()] {
            let r = (sphere_moment_matrix(&a, rule) - third * a.trace()).abs();
            out.trace = out.trace.max(r);
        }
        out.antisymmetric = out
            .antisymmetric
            .max(sphere_moment_matrix(&(m - m.transpose()), rule).abs());
    }
    out
}

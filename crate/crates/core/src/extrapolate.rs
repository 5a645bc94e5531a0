//! Finite-difference derivatives of sampled radial profiles, refined by
//! Richardson extrapolation over a ladder of halved steps.
//!
//! All arithmetic acts component-wise on [`Ensemble`]s, so the quadrature
//! spread of the inputs propagates into the derivative's error bar.

use serde::{Deserialize, Serialize};

use crate::error::{CuspError, Result};
use crate::quadrature::estimate::{Ensemble, IntegralEstimate, Method};

/// Finite-difference weights for the `order`-th derivative at `x0` from
/// values at `nodes` (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(order < n, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// Offsets `0..=4`: for quantities defined at the center.
    Forward,
    /// Offsets `1..=5`: for quantities whose value at the center is a limit.
    Open,
    /// Offsets `-2..=2`.
    Central,
}

impl Stencil {
    pub fn offsets(&self) -> [f64; 5] {
        match self {
            Stencil::Forward => [0.0, 1.0, 2.0, 3.0, 4.0],
            Stencil::Open => [1.0, 2.0, 3.0, 4.0, 5.0],
            Stencil::Central => [-2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }

    /// `(leading error order, order increment)` of the stencil's truncation
    /// error expansion in the step.
    pub fn error_orders(&self, derivative: usize) -> (i32, i32) {
        match self {
            Stencil::Forward | Stencil::Open => (5 - derivative as i32, 1),
            Stencil::Central => (4, 2),
        }
    }
}

/// Steps `h_m = base·2^{-m}` for `m = 0..levels`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLadder {
    pub base: f64,
    pub levels: usize,
}

impl StepLadder {
    /// Ladder whose coarsest stencil reaches out to `r0`: the outer node of a
    /// 5-point one-sided stencil sits at `4h`.
    pub fn reaching(r0: f64, halvings: usize) -> Self {
        StepLadder {
            base: r0 / 4.0,
            levels: halvings + 1,
        }
    }

    pub fn step(&self, m: usize) -> f64 {
        self.base * 0.5f64.powi(m as i32)
    }

    /// All sample abscissae used by `stencil` around `center`, ascending and
    /// without duplicates.
    pub fn abscissae(&self, center: f64, stencil: Stencil) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.levels)
            .flat_map(|m| {
                let h = self.step(m);
                stencil.offsets().map(|o| center + o * h)
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Sampled values of a radial profile, looked up by abscissa.
#[derive(Debug, Clone, Default)]
pub struct Profile {
    points: Vec<(f64, Ensemble)>,
}

impl Profile {
    pub fn new(mut points: Vec<(f64, Ensemble)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Profile { points }
    }

    pub fn get(&self, r: f64) -> Result<&Ensemble> {
        let i = self.points.partition_point(|p| p.0 < r - 1e-14 * r.abs().max(1e-300));
        match self.points.get(i) {
            Some((x, e)) if (x - r).abs() <= 1e-12 * r.abs().max(1e-300) => Ok(e),
            _ => Err(CuspError::Consistency(format!("no profile sample at r = {r}"))),
        }
    }

    pub fn points(&self) -> &[(f64, Ensemble)] {
        &self.points
    }
}

/// Outcome of a Richardson-extrapolated derivative.
#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub estimate: IntegralEstimate,
    pub ensemble: Ensemble,
    /// Truncation error estimate of the selected tableau entry.
    pub truncation: f64,
    /// Roundoff allowance of the selected entry.
    pub floor: f64,
    pub level: usize,
    pub column: usize,
}

/// `f^{(derivative)}(center)` from profile samples.
///
/// The tableau is built on every ensemble component; the entry with the
/// smallest truncation estimate is selected on the primary component. The
/// error is that truncation estimate plus the ensemble spread plus a
/// roundoff floor.
pub fn richardson_derivative(
    profile: &Profile,
    center: f64,
    derivative: usize,
    stencil: Stencil,
    ladder: &StepLadder,
) -> Result<Extrapolated> {
    let offsets = stencil.offsets();
    let unit = fornberg_weights(0.0, &offsets, derivative);
    let (p0, dp) = stencil.error_orders(derivative);
    let mut base: Vec<Ensemble> = Vec::with_capacity(ladder.levels);
    let mut floors: Vec<f64> = Vec::with_capacity(ladder.levels);
    for m in 0..ladder.levels {
        let h = ladder.step(m);
        let scale = h.powi(derivative as i32);
        let mut terms = Vec::with_capacity(5);
        let mut mag = 0.0;
        for (o, w) in offsets.iter().zip(&unit) {
            let e = profile.get(center + o * h)?;
            mag += (w * e.primary()).abs();
            terms.push((w / scale, e));
        }
        base.push(Ensemble::linear(&terms));
        floors.push(8.0 * f64::EPSILON * mag / scale);
    }

    // tableau[m][k]
    let mut table: Vec<Vec<Ensemble>> = Vec::new();
    let mut best: Option<(f64, usize, usize)> = None;
    for m in 0..ladder.levels {
        let mut row = vec![base[m].clone()];
        if m > 0 {
            let t = (row[0].primary() - table[m - 1][0].primary()).abs();
            consider(&mut best, t, m, 0);
        }
        for k in 1..=m {
            let p = p0 + (k as i32 - 1) * dp;
            let factor = 2f64.powi(p) - 1.0;
            let prev = &row[k - 1];
            let up = &table[m - 1][k - 1];
            let next = prev.zip_with(up, |a, b| a + (a - b) / factor);
            let err = (next.primary() - prev.primary())
                .abs()
                .max((next.primary() - up.primary()).abs());
            consider(&mut best, err, m, k);
            row.push(next);
        }
        table.push(row);
    }
    let (truncation, level, column) = best.unwrap_or((f64::INFINITY, 0, 0));
    let chosen = table[level][column].clone();
    let floor = floors[level] * (1usize << column.min(16)) as f64;
    let error = truncation + chosen.spread_error() + floor;
    let n_evals = 5 * ladder.levels;
    Ok(Extrapolated {
        estimate: IntegralEstimate::new(chosen.primary(), error, Method::Richardson, n_evals),
        ensemble: chosen,
        truncation,
        floor,
        level,
        column,
    })
}

/// Linear combination of extrapolated derivatives and plain ensembles. The
/// spread is taken on the combined ensemble, so correlated discretization
/// errors cancel; truncation and roundoff allowances add.
pub fn combine(derivs: &[(f64, &Extrapolated)], values: &[(f64, &Ensemble)], method: Method) -> IntegralEstimate {
    let mut terms: Vec<(f64, &Ensemble)> = derivs.iter().map(|(c, d)| (*c, &d.ensemble)).collect();
    terms.extend_from_slice(values);
    let e = Ensemble::linear(&terms);
    let allowance: f64 = derivs.iter().map(|(c, d)| c.abs() * (d.truncation + d.floor)).sum();
    let n_evals = derivs.iter().map(|(_, d)| d.estimate.n_evals).sum();
    IntegralEstimate::new(e.primary(), e.spread_error() + allowance, method, n_evals)
}

fn consider(best: &mut Option<(f64, usize, usize)>, err: f64, m: usize, k: usize) {
    if err.is_finite() && best.is_none_or(|b| err < b.0) {
        *best = Some((err, m, k));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_textbook_stencils() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = fornberg_weights(0.0, &[0.0, 1.0, 2.0, 3.0, 4.0], 1);
        let want = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fornberg_is_exact_on_polynomials() {
        let nodes = [1.0, 2.0, 3.0, 4.0, 5.0];
        for d in 0..4 {
            let w = fornberg_weights(0.0, &nodes, d);
            // f(x) = x⁴ - 2x³ + x - 7: derivatives at 0 are (-7, 1, 0, -12)
            let f = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x - 7.0;
            let got: f64 = nodes.iter().zip(&w).map(|(x, w)| w * f(*x)).sum();
            let want = [-7.0, 1.0, 0.0, -12.0][d];
            assert!((got - want).abs() < 1e-11, "d={d}: {got}");
        }
    }

    fn profile_of(f: impl Fn(f64) -> f64, center: f64, st: Stencil, ladder: &StepLadder) -> Profile {
        Profile::new(
            ladder
                .abscissae(center, st)
                .into_iter()
                .map(|r| (r, Ensemble::nested(f(r), f(r) * (1.0 + 1e-13))))
                .collect(),
        )
    }

    #[test]
    fn exponential_derivatives_at_zero() {
        let ladder = StepLadder::reaching(0.1, 6);
        let p = profile_of(|r| 0.5 * (-r).exp(), 0.0, Stencil::Forward, &ladder);
        for (d, want) in [(1, -0.5), (2, 0.5), (3, -0.5)] {
            let e = richardson_derivative(&p, 0.0, d, Stencil::Forward, &ladder).unwrap();
            assert!((e.estimate.value - want).abs() < 1e-6, "d={d}: {:?}", e.estimate);
            assert!((e.estimate.value - want).abs() <= e.estimate.error.max(1e-12));
        }
    }

    #[test]
    fn open_stencil_limits() {
        let ladder = StepLadder::reaching(0.1, 6);
        let f = |r: f64| (2.0 * r).cos() + r;
        let p = profile_of(f, 0.0, Stencil::Open, &ladder);
        let v = richardson_derivative(&p, 0.0, 0, Stencil::Open, &ladder).unwrap();
        assert!((v.estimate.value - 1.0).abs() < 1e-12);
        let d = richardson_derivative(&p, 0.0, 1, Stencil::Open, &ladder).unwrap();
        assert!((d.estimate.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn central_second_derivative() {
        let ladder = StepLadder { base: 0.05, levels: 5 };
        let p = profile_of(|r| r.sin(), 1.0, Stencil::Central, &ladder);
        let e = richardson_derivative(&p, 1.0, 2, Stencil::Central, &ladder).unwrap();
        assert!((e.estimate.value + 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn missing_sample_is_an_error() {
        let ladder = StepLadder::reaching(0.1, 2);
        let p = Profile::new(vec![(0.0, Ensemble::exact(1.0))]);
        assert!(richardson_derivative(&p, 0.0, 1, Stencil::Forward, &ladder).is_err());
    }
}

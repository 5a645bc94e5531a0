//! The four subcommands as library functions.

use nalgebra::Vector3;
use serde::Serialize;

use super::config::{ConvergeMethod, RunConfig};
use super::output::{Outcome, Row};
use crate::cusp_report::{build_report, BoundRow, CuspReport, DerivativeRow};
use crate::density::density_at;
use crate::error::{CuspError, Result};
use crate::jastrow::{
    apriori_refinement, identity_suite, phi3_smoothness_probe, AprioriRefinement, JastrowSuite, SmoothnessTable,
};
use crate::quadrature::{moment_residuals, HatMethod, IntegralEstimate, MomentResiduals, SphericalRule, SHIPPED_DEGREES};

/// Residual bound for the sphere-moment identities.
pub const SPHERE_TOLERANCE: f64 = 1e-12;
/// Relative bound for the Jastrow contraction identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Relative bound for analytic versus finite-difference second partials.
pub const PARTIAL_TOLERANCE: f64 = 1e-5;

fn estimate_row(quantity: &str, e: &IntegralEstimate, route: &str) -> Row {
    Row::new(quantity, Some(0.0), Some(e.value), Some(e.error))
        .method(e.method.as_str())
        .flag(route)
}

fn derivative_rows(d: &DerivativeRow) -> Vec<Row> {
    let mut rows = Vec::new();
    for (route, e) in [("direct", &d.direct), ("recursion", &d.recursion), ("closed", &d.closed)] {
        if let Some(e) = e {
            rows.push(estimate_row(&d.quantity, e, route));
        }
    }
    if let Some(g) = d.golden {
        rows.push(Row::new(&d.quantity, Some(0.0), Some(g), Some(0.0)).method("exact").flag("golden"));
    }
    rows
}

fn bound_row(b: &BoundRow) -> Row {
    let mut flag = b.verdict.as_str().to_string();
    if !b.binding {
        flag.push_str(" (diagnostic)");
    }
    Row::new(&b.name, None, b.margin, Some(b.error)).method("margin").flag(flag)
}

/// Runs the full cusp report. Exit code 1 iff a binding row is violated.
pub fn cmd_report(config: &RunConfig) -> Result<Outcome<CuspReport>> {
    let model = config.build_model()?;
    let spec = config.build_spec()?;
    let report = build_report(&model, &spec, &config.report_settings(&model))?;
    let mut rows: Vec<Row> = report.rho.iter().chain(&report.auxiliary).flat_map(derivative_rows).collect();
    rows.extend(report.all_rows().map(bound_row));
    if let Some(g) = report.golden_ratios {
        for (k, v) in g.iter().enumerate() {
            rows.push(
                Row::new(format!("golden ratio {}", k + 1), Some(0.0), Some(*v), Some(0.0))
                    .method("exact")
                    .flag("golden"),
            );
        }
    }
    let notes = report.flags.iter().chain(&report.notices).cloned().collect();
    Ok(Outcome {
        command: "report",
        exit_code: if report.violations() > 0 { 1 } else { 0 },
        config_hash: Some(config.hash()),
        seed: Some(config.seed()),
        rows,
        notes,
        result: report,
    })
}

/// Sphere-moment residuals for the given rule degrees (all shipped rules
/// when empty).
pub fn cmd_sphere_check(degrees: &[u32], trials: usize, seed: u64) -> Result<Outcome<Vec<MomentResiduals>>> {
    let degrees: Vec<u32> = if degrees.is_empty() {
        SHIPPED_DEGREES.to_vec()
    } else {
        degrees.to_vec()
    };
    let mut out = Vec::new();
    for d in degrees {
        let rule = SphericalRule::with_degree(d).map_err(|e| match e {
            CuspError::Domain(m) => CuspError::Config(m),
            other => other,
        })?;
        out.push(moment_residuals(&rule, trials, seed));
    }
    let mut rows = Vec::new();
    for r in &out {
        for (name, v) in [
            ("dot-product", r.dot_product),
            ("trace", r.trace),
            ("antisymmetric", r.antisymmetric),
            ("second-moments", r.second_moments),
        ] {
            let flag = if v <= SPHERE_TOLERANCE { "ok" } else { "exceeds" };
            rows.push(
                Row::new(format!("degree {} {name}", r.degree), None, Some(v), None)
                    .method("residual")
                    .flag(flag),
            );
        }
    }
    let failed = out.iter().any(|r| r.max() > SPHERE_TOLERANCE);
    Ok(Outcome {
        command: "sphere-check",
        exit_code: i32::from(failed),
        config_hash: None,
        seed: Some(seed),
        result: out,
        rows,
        notes: vec![format!("tolerance {SPHERE_TOLERANCE:e} on every residual")],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct JastrowCheck {
    pub suite: JastrowSuite,
    pub apriori: Option<AprioriRefinement>,
    pub smoothness: Option<SmoothnessTable>,
    pub notices: Vec<String>,
}

/// Jastrow identity suite plus the a priori and smoothness diagnostics.
/// Exit code 1 iff an identity or second partial exceeds its tolerance.
pub fn cmd_jastrow_check(config: &RunConfig) -> Result<Outcome<JastrowCheck>> {
    let model = config.build_model()?;
    let j = &config.jastrow;
    let suite = identity_suite(&model, &config.suite_settings())?;
    let mut notices = Vec::new();
    let apriori = match apriori_refinement(
        &model,
        &config.apriori_center(),
        j.apriori_inner,
        j.apriori_outer,
        j.apriori_samples,
        config.seed(),
    ) {
        Ok(a) => Some(a),
        Err(CuspError::UnsupportedModel(m)) => {
            notices.push(format!("a priori diagnostic skipped: {m}"));
            None
        }
        Err(e) => return Err(e),
    };
    let smoothness = Some(phi3_smoothness_probe(&model, &config.probe_center(), &j.probe_radii)?);

    let mut rows = Vec::new();
    for r in &suite.identities {
        let flag = if r.residual <= IDENTITY_TOLERANCE { "ok" } else { "exceeds" };
        rows.push(
            Row::new(format!("{} #{}", r.identity, r.sample), None, Some(r.lhs - r.rhs), Some(r.residual))
                .method("lhs-rhs")
                .flag(flag),
        );
    }
    for p in &suite.partials {
        let flag = if p.residual <= PARTIAL_TOLERANCE { "ok" } else { "exceeds" };
        rows.push(
            Row::new(format!("fcut-hessian #{} {:?}", p.sample, p.entry), None, Some(p.analytic), Some(p.residual))
                .method("finite-difference")
                .flag(flag),
        );
    }
    if let Some(a) = &apriori {
        for e in [&a.coarse, &a.fine] {
            let flag = if a.unstable { "unstable" } else { "stable" };
            rows.push(Row::new(format!("apriori ratio n={}", e.samples), None, Some(e.ratio), None).method("sampled-sup").flag(flag));
            rows.push(Row::new(format!("raw hessian sup n={}", e.samples), None, Some(e.raw_sup), None).method("sampled-sup"));
        }
        notices.extend(a.fine.notice.clone());
    }
    if let Some(t) = &smoothness {
        let flag = if t.unbounded { "unbounded" } else { "bounded" };
        for r in &t.rows {
            rows.push(Row::new("phi3 gradient quotient", Some(r.radius), Some(r.quotient), None).method("lipschitz").flag(flag));
        }
    }
    let failed = suite.max_identity_residual() > IDENTITY_TOLERANCE || suite.max_partial_residual() > PARTIAL_TOLERANCE;
    notices.push(format!(
        "max identity residual {:.3e}, max second-partial residual {:.3e}",
        suite.max_identity_residual(),
        suite.max_partial_residual()
    ));
    Ok(Outcome {
        command: "jastrow-check",
        exit_code: i32::from(failed),
        config_hash: Some(config.hash()),
        seed: Some(config.seed()),
        rows,
        notes: notices.clone(),
        result: JastrowCheck {
            suite,
            apriori,
            smoothness,
            notices,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeRow {
    /// Monte-Carlo sample count or grid order.
    pub size: usize,
    pub n_evals: usize,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeStudy {
    pub method: ConvergeMethod,
    pub point: [f64; 3],
    pub rows: Vec<ConvergeRow>,
    /// Least-squares slope of `ln error` against `ln n_evals`.
    pub fitted_order: Option<f64>,
}

/// Least-squares slope of `y` on `x`; `None` with fewer than two points.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `ρ(x)` at the configured point under a sequence of sample counts or grid
/// orders.
pub fn cmd_converge(config: &RunConfig) -> Result<Outcome<ConvergeStudy>> {
    let model = config.build_model()?;
    let spec = config.build_spec()?;
    let c = &config.converge;
    let x = Vector3::from(c.point);
    let base = config.quadrature_settings(&model);
    let sizes: &[usize] = match c.method {
        ConvergeMethod::MonteCarlo => &c.sample_counts,
        ConvergeMethod::Grid => &c.grid_orders,
    };
    let mut rows = Vec::new();
    for &size in sizes {
        let mut s = base;
        match c.method {
            ConvergeMethod::MonteCarlo => {
                s.hat.method = HatMethod::MonteCarlo;
                s.hat.sampler.n_samples = size;
                if let Some(r) = c.envelope_rate {
                    s.hat.sampler.envelope_rate = r;
                }
            }
            ConvergeMethod::Grid => {
                s.hat.method = HatMethod::Grid;
                s.hat.grid.radial_order = size;
                s.hat.grid.angular_order = size;
            }
        }
        let e = density_at(&model, &spec, &x, &s)?;
        rows.push(ConvergeRow {
            size,
            n_evals: e.n_evals,
            value: e.value,
            error: e.error,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0 && r.error.is_finite() && r.n_evals > 0)
        .map(|r| ((r.n_evals as f64).ln(), r.error.ln()))
        .collect();
    let fitted_order = fit_slope(&pts);
    let method = match c.method {
        ConvergeMethod::MonteCarlo => "monte-carlo",
        ConvergeMethod::Grid => "tensor-grid",
    };
    let mut out_rows: Vec<Row> = rows
        .iter()
        .map(|r| {
            Row::new(format!("rho(x) size={}", r.size), Some(x.norm()), Some(r.value), Some(r.error))
                .method(method)
                .flag(format!("evals={}", r.n_evals))
        })
        .collect();
    if let Some(k) = fitted_order {
        out_rows.push(Row::new("fitted order", None, Some(k), None).method(method).flag("slope"));
    }
    Ok(Outcome {
        command: "converge",
        exit_code: 0,
        config_hash: Some(config.hash()),
        seed: Some(config.seed()),
        rows: out_rows,
        notes: Vec::new(),
        result: ConvergeStudy {
            method: c.method,
            point: c.point,
            rows,
            fitted_order,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&n| (n.ln(), (3.0 * n.powf(-0.5)).ln())).collect();
        assert!((fit_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_slope(&pts[..1]), None);
    }

    #[test]
    fn sphere_check_rejects_unknown_degree() {
        assert!(matches!(cmd_sphere_check(&[5], 1, 0), Err(CuspError::Config(_))));
        let o = cmd_sphere_check(&[7], 10, 0).unwrap();
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.rows.len(), 4);
    }
}

//! Property tests over randomly drawn inputs.

use cusplab::cusp_report::{golden_hydrogenic, rho2_bound_check, BoundRow, Relation, Verdict};
use cusplab::density::{recursion_ensemble, rho_tilde_kth_at_zero};
use cusplab::jastrow::{derivatives, f2, f3, f_cut, fd_second_partial, CutoffFn, Part};
use cusplab::quadrature::estimate::{pairwise_sum, Ensemble};
use cusplab::quadrature::monte_carlo::McSampler;
use cusplab::quadrature::sphere::{SphericalRule, SHIPPED_DEGREES};
use cusplab::wavefunction::orbital::RadialOrbital;
use cusplab::wavefunction::{AtomSpec, Configuration, WavefunctionModel};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-r..r).prop_map(Vector3::from)
}

fn config(n: usize, r: f64) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(point(r), n).prop_map(Configuration::new)
}

/// Electrons at least `sep` from the nucleus and from each other.
fn regular(c: &Configuration, sep: f64) -> bool {
    let x = &c.coords;
    x.iter().all(|v| v.norm() >= sep)
        && (0..x.len()).all(|i| ((i + 1)..x.len()).all(|j| (x[i] - x[j]).norm() >= sep))
}

fn he_product() -> WavefunctionModel {
    let o = RadialOrbital::hydrogenic(1, 0, 0, 2.0).unwrap();
    WavefunctionModel::orbital_product(vec![o.clone(), o], 2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cutoff_stays_in_unit_interval(t in 0.0f64..3.0) {
        let (v, d1, d2) = CutoffFn::default().jet(t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(d1 <= 0.0);
        prop_assert!(d2.is_finite());
        if t <= 1.0 { prop_assert_eq!((v, d1, d2), (1.0, 0.0, 0.0)); }
        if t >= 2.0 { prop_assert_eq!((v, d1, d2), (0.0, 0.0, 0.0)); }
    }

    #[test]
    fn cutoff_jet_matches_differences(t in 1.05f64..1.95) {
        let cut = CutoffFn::default();
        let h = 1e-5;
        let (_, d1, d2) = cut.jet(t);
        let fd1 = (cut.value(t + h) - cut.value(t - h)) / (2.0 * h);
        let fd2 = (cut.value(t + h) - 2.0 * cut.value(t) + cut.value(t - h)) / (h * h);
        prop_assert!((d1 - fd1).abs() <= 1e-7 * d1.abs().max(1.0));
        prop_assert!((d2 - fd2).abs() <= 1e-3 * d2.abs().max(1.0));
    }

    #[test]
    fn cut_parts_equal_plain_parts_near_the_nucleus(c in config(3, 0.28), z in 0.5f64..4.0) {
        let p = f_cut(&c, z);
        prop_assert_eq!(p.f2_cut, f2(&c, z));
        prop_assert_eq!(p.f3_cut, f3(&c, z));
        prop_assert_eq!(p.f_cut(), p.f2 + p.f3);
    }

    #[test]
    fn fcut_hessian_matches_differences(c in config(2, 2.2), z in 0.5f64..3.0, a in 0usize..6, b in 0usize..6) {
        prop_assume!(regular(&c, 0.2));
        let cut = CutoffFn::default();
        let h2 = derivatives(&c, z, Part::F2Cut, &cut).unwrap().hessian;
        let h3 = derivatives(&c, z, Part::F3Cut, &cut).unwrap().hessian;
        let analytic = h2[(a, b)] + h3[(a, b)];
        let f = |y: &[f64]| f_cut(&Configuration::from_flat(y).unwrap(), z).f_cut();
        let (fd, _) = fd_second_partial(f, &c.to_flat(), a, b, 2e-3);
        prop_assert!((analytic - fd).abs() <= 1e-5 * analytic.abs().max(1.0), "{analytic} vs {fd}");
    }

    #[test]
    fn cut_nuclear_term_has_bounded_second_derivatives(x in point(6.0), z in 0.5f64..4.0) {
        prop_assume!(x.norm() > 1e-3);
        let c = Configuration::new(vec![x]);
        let cut = CutoffFn::default();
        let plain = derivatives(&c, z, Part::F2, &cut).unwrap().hessian;
        let cutted = derivatives(&c, z, Part::F2Cut, &cut).unwrap().hessian;
        // (χ - 1)|x| is smooth, with second derivatives bounded by a
        // constant times Z independent of the point
        prop_assert!((cutted - plain).amax() <= 20.0 * z);
    }

    #[test]
    fn recursion_is_linear(
        h in -10.0f64..10.0, rho in -10.0f64..10.0, h2 in -10.0f64..10.0, rho2 in -10.0f64..10.0,
        a in -3.0f64..3.0, z in 0.5f64..4.0, k in 0i64..5,
    ) {
        let lhs = rho_tilde_kth_at_zero(k, h + a * h2, rho + a * rho2, z).unwrap();
        let rhs = rho_tilde_kth_at_zero(k, h, rho, z).unwrap() + a * rho_tilde_kth_at_zero(k, h2, rho2, z).unwrap();
        let scale = (k as f64 + 1.0) * (h.abs() + a.abs() * h2.abs()) + z * (rho.abs() + a.abs() * rho2.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-14 * scale.max(1.0));
        let e = recursion_ensemble(k as usize, &Ensemble::exact(h), &Ensemble::exact(rho), z).primary();
        prop_assert!((e - rho_tilde_kth_at_zero(k, h, rho, z).unwrap()).abs() <= 1e-15 * scale.max(1.0));
    }

    #[test]
    fn golden_ratios_scale_with_charge(n in 1u32..4, z in 0.2f64..5.0, lambda in 0.2f64..5.0) {
        let base = golden_hydrogenic(n, z).unwrap();
        let scaled = golden_hydrogenic(n, lambda * z).unwrap();
        for (k, (b, s)) in base.iter().zip(&scaled).enumerate() {
            let expected = b * lambda.powi(k as i32 + 1);
            prop_assert!((s - expected).abs() <= 1e-13 * expected.abs());
        }
    }

    #[test]
    fn improved_second_derivative_bound_is_sharper(z in 0.1f64..5.0, eps in 0.0f64..5.0, rho0 in 0.01f64..10.0) {
        let spec = AtomSpec::new(2, z, -eps, 0.0).unwrap();
        let rows = rho2_bound_check(&Ensemble::exact(0.0), &Ensemble::exact(rho0), &spec, true);
        prop_assert_eq!(rows.len(), 2);
        prop_assert!(rows[1].rhs.unwrap() >= rows[0].rhs.unwrap());
    }

    #[test]
    fn verdicts_respect_tolerance(lhs in -5.0f64..5.0, rhs in -5.0f64..5.0, err in 0.0f64..1.0) {
        for rel in [Relation::AtMost, Relation::AtLeast, Relation::Equal] {
            let row = BoundRow::evaluate("p", rel, lhs, rhs, err, false, true);
            let within = (lhs - rhs).abs() <= 1e-10f64.max(3.0 * err);
            prop_assert_eq!(row.verdict == Verdict::HoldsAtEquality, within);
            if !within {
                let holds = match rel {
                    Relation::AtMost => lhs < rhs,
                    Relation::AtLeast => lhs > rhs,
                    Relation::Equal => false,
                };
                prop_assert_eq!(row.verdict == Verdict::Holds, holds);
                prop_assert_eq!(row.fails(), !holds);
            }
        }
    }

    #[test]
    fn pairwise_sum_is_close_to_naive(xs in prop::collection::vec(-1e3f64..1e3, 0..500)) {
        let naive: f64 = xs.iter().sum();
        let abs: f64 = xs.iter().map(|v| v.abs()).sum();
        prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-12 * abs.max(1.0));
    }

    #[test]
    fn rules_integrate_quadratic_forms(entries in prop::array::uniform9(-1.0f64..1.0), d in 0usize..4) {
        let m = Matrix3::from_row_slice(&entries);
        let rule = SphericalRule::with_degree(SHIPPED_DEGREES[d]).unwrap();
        let got = rule.apply(|w| w.dot(&(m * w)));
        let exact = 4.0 * std::f64::consts::PI / 3.0 * m.trace();
        prop_assert!((got - exact).abs() <= 1e-12);
    }

    #[test]
    fn phi_reproduces_psi(x in point(4.0), hat in point(4.0)) {
        let model = he_product();
        let c = Configuration::new(vec![x, hat]);
        let psi = model.eval_psi(&c).unwrap();
        let phi = model.eval_phi(0, &x, &[hat]).unwrap();
        prop_assert_eq!(phi * (-x.norm()).exp(), psi);
        let swapped = model.eval_psi(&Configuration::new(vec![hat, x])).unwrap();
        let phi1 = model.eval_phi(1, &x, &[hat]).unwrap();
        // other slots reorder the product, so agreement is to rounding only
        prop_assert!((phi1 * (-x.norm()).exp() - swapped).abs() <= 4.0 * f64::EPSILON * swapped.abs());
    }

    #[test]
    fn gradient_matches_differences(c in config(2, 3.0)) {
        prop_assume!(regular(&c, 0.1));
        let model = he_product();
        let grad = model.eval_grad_psi(&c).unwrap();
        let flat = c.to_flat();
        let psi = |y: &[f64]| model.eval_psi(&Configuration::from_flat(y).unwrap()).unwrap();
        for a in 0..6 {
            let d = |h: f64| {
                let (mut p, mut m) = (flat.clone(), flat.clone());
                p[a] += h;
                m[a] -= h;
                (psi(&p) - psi(&m)) / (2.0 * h)
            };
            let fd = (4.0 * d(0.5e-4) - d(1e-4)) / 3.0;
            let g = grad[a / 3][a % 3];
            prop_assert!((g - fd).abs() <= 1e-6 * g.abs().max(1e-3), "{g} vs {fd}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn normalize_is_idempotent(n in 1u32..4, z in 0.5f64..3.0, factor in 0.1f64..10.0) {
        let m = WavefunctionModel::hydrogenic(n, 0, 0, z).unwrap().scaled(factor);
        let once = m.normalize().unwrap();
        let twice = once.normalize().unwrap();
        let c = Configuration::new(vec![Vector3::new(0.3, -0.2, 0.5)]);
        let (a, b) = (once.eval_psi(&c).unwrap(), twice.eval_psi(&c).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn sampler_is_deterministic(seed in any::<u64>(), n_hat in 1usize..3) {
        let s = McSampler::new(seed, 64, 0.8);
        let a = s.draw(n_hat).unwrap();
        let b = s.draw(n_hat).unwrap();
        prop_assert_eq!(a.points, b.points);
        prop_assert_eq!(a.density, b.density);
    }
}

//! Moment residuals of every shipped spherical rule.

use cusplab::quadrature::{moment_residuals, SphericalRule, SHIPPED_DEGREES};

fn main() -> cusplab::Result<()> {
    for degree in SHIPPED_DEGREES {
        let rule = SphericalRule::with_degree(degree)?;
        let r = moment_residuals(&rule, 200, 1);
        println!(
            "degree {:>2}: {:>3} nodes, worst residual {:.2e} (dot {:.1e}, trace {:.1e}, antisymmetric {:.1e}, second moments {:.1e})",
            degree,
            rule.len(),
            r.max(),
            r.dot_product,
            r.trace,
            r.antisymmetric,
            r.second_moments
        );
    }
    Ok(())
}

//! Derivatives of the spherically averaged density at the nucleus for the
//! hydrogen 1s state, by every route, next to the golden values.

use cusplab::cusp_report::{build_report, ReportSettings};
use cusplab::wavefunction::{AtomSpec, WavefunctionModel};

fn main() -> cusplab::Result<()> {
    let model = WavefunctionModel::hydrogenic(1, 0, 0, 1.0)?;
    let spec = AtomSpec::hydrogenic(1, 1.0)?;
    let report = build_report(&model, &spec, &ReportSettings::for_model(&model))?;

    let show = |e: &Option<cusplab::quadrature::IntegralEstimate>| {
        e.as_ref().map_or("-".to_string(), |e| format!("{:.10} ± {:.1e}", e.value, e.error))
    };
    println!("{:<12} {:>26} {:>26} {:>26} {:>10}", "quantity", "direct", "recursion", "closed", "golden");
    for row in &report.rho {
        println!(
            "{:<12} {:>26} {:>26} {:>26} {:>10}",
            row.quantity,
            show(&row.direct),
            show(&row.recursion),
            show(&row.closed),
            row.golden.map_or("-".into(), |g| format!("{g}")),
        );
    }
    println!("golden ratios: {:?}", report.golden_ratios);
    for b in report.all_rows() {
        println!("{:<48} {}", b.name, b.verdict.as_str());
    }
    Ok(())
}

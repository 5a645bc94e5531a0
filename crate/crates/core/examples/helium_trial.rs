//! Cusp diagnostics for the bare-charge helium product trial. The trial is
//! not an eigenfunction, so rows derived from the eigenvalue equation are
//! reported as diagnostics.

use cusplab::cusp_report::{build_report, ReportSettings};
use cusplab::wavefunction::{AtomSpec, RadialOrbital, WavefunctionModel};

fn main() -> cusplab::Result<()> {
    let orbital = RadialOrbital::hydrogenic(1, 0, 0, 2.0)?;
    let model = WavefunctionModel::orbital_product(vec![orbital.clone(), orbital], 2.0)?;
    // variational energy of the trial and the He+ ground energy
    let spec = AtomSpec::new(2, 2.0, -1.375, -1.0)?;
    let report = build_report(&model, &spec, &ReportSettings::for_model(&model))?;

    for f in &report.flags {
        println!("flag: {f}");
    }
    for b in report.all_rows() {
        let tag = if b.eigen_only { " [eigen-only]" } else { "" };
        match b.margin {
            Some(m) => println!("{:<48} margin {:>12.4e} ± {:>9.2e}  {}{}", b.name, m, b.error, b.verdict.as_str(), tag),
            None => println!("{:<48} {}{}", b.name, b.verdict.as_str(), tag),
        }
    }
    Ok(())
}

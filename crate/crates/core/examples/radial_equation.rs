//! Density profile of hydrogen 2s as CSV on stdout, followed by the
//! residual of the radial equation the profile satisfies.

use cusplab::density::{log_spaced, pde_residuals, RadialSamples};
use cusplab::marginal::QuadratureSettings;
use cusplab::wavefunction::{AtomSpec, WavefunctionModel};

fn main() -> cusplab::Result<()> {
    let model = WavefunctionModel::hydrogenic(2, 0, 0, 1.0)?;
    let spec = AtomSpec::hydrogenic(2, 1.0)?;
    let settings = QuadratureSettings::for_model(&model);
    let radii = log_spaced(1e-3, 10.0, 12);

    let samples = RadialSamples::sample(&model, &spec, &radii, &settings)?;
    samples.write_csv(std::io::stdout().lock())?;

    println!();
    println!("{:>10} {:>14} {:>14}", "r", "residual", "error");
    for row in pde_residuals(&model, &spec, &radii, &settings)? {
        println!("{:>10.4e} {:>14.3e} {:>14.3e}", row.r, row.residual, row.error);
    }
    Ok(())
}

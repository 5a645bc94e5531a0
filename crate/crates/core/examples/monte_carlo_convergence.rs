//! Monte-Carlo convergence of the helium trial density at the nucleus. The
//! sampling envelope is broader than the orbitals, so the importance weights
//! fluctuate and the error falls like n^{-1/2}.

use cusplab::cli::commands::cmd_converge;
use cusplab::cli::config::RunConfig;

const CONFIG: &str = r#"
[system]
charge = 2.0
energy = -1.375
prev_ground_energy = -1.0

[model]
kind = "orbital-product"
orbitals = [{ n = 1 }, { n = 1 }]

[quadrature]
seed = 11

[converge]
method = "monte-carlo"
envelope_rate = 0.8
sample_counts = [100, 1000, 10000, 100000]
"#;

fn main() -> cusplab::Result<()> {
    let config = RunConfig::parse(CONFIG)?;
    let study = cmd_converge(&config)?.result;
    for row in &study.rows {
        println!("n = {:>7}: rho(0) = {:.6} ± {:.2e}", row.size, row.value, row.error);
    }
    println!("fitted order {:.3}", study.fitted_order.unwrap_or(f64::NAN));
    Ok(())
}

//! Contracted Hessian identities of the two- and three-body Jastrow factors
//! and analytic-versus-difference second partials, for helium and lithium
//! product trials.

use cusplab::jastrow::{identity_suite, SuiteSettings};
use cusplab::wavefunction::{RadialOrbital, WavefunctionModel};

fn main() -> cusplab::Result<()> {
    for (charge, shells) in [(2.0, vec![1, 1]), (3.0, vec![1, 1, 2])] {
        let orbitals = shells
            .iter()
            .map(|&n| RadialOrbital::hydrogenic(n, 0, 0, charge))
            .collect::<cusplab::Result<Vec<_>>>()?;
        let model = WavefunctionModel::orbital_product(orbitals, charge)?;
        let suite = identity_suite(&model, &SuiteSettings::default())?;
        println!(
            "{} electrons: {} identity rows, worst residual {:.2e}; worst second-partial residual {:.2e}",
            suite.n_electrons,
            suite.identities.len(),
            suite.max_identity_residual(),
            suite.max_partial_residual()
        );
    }
    Ok(())
}

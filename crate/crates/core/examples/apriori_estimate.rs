//! The a priori estimate for hydrogen: the ratio of the subtracted second
//! derivatives to sup |ψ| settles under sample refinement while the raw
//! second derivatives keep growing towards the nucleus.

use cusplab::jastrow::apriori_refinement;
use cusplab::wavefunction::{Configuration, WavefunctionModel};
use nalgebra::Vector3;

fn main() -> cusplab::Result<()> {
    let model = WavefunctionModel::hydrogenic(1, 0, 0, 1.0)?;
    let x0 = Configuration::new(vec![Vector3::zeros()]);
    for count in [1_000, 10_000] {
        let r = apriori_refinement(&model, &x0, 1.0, 2.0, count, 0)?;
        println!(
            "{:>6} -> {:>6} samples: ratio {:.4} -> {:.4} ({:+.2}%), raw sup {:.2} -> {:.2} (x{:.2})",
            r.coarse.samples,
            r.fine.samples,
            r.coarse.ratio,
            r.fine.ratio,
            100.0 * (r.fine.ratio / r.coarse.ratio - 1.0),
            r.coarse.raw_sup,
            r.fine.raw_sup,
            r.raw_growth
        );
    }
    Ok(())
}

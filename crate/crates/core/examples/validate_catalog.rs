//! Check every catalog problem against the standing hypotheses and list the
//! flat regions of its diffusion function.

use vvlab::catalog::{self, CATALOG};
use vvlab::problem::{flat_regions, validate_problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in CATALOG {
        let spec = catalog::problem(name)?;
        let report = validate_problem(&spec);
        let flats = flat_regions(&spec.a)?;
        println!(
            "{name:<20} valid {:<5} Lip(f) {:.3} Lip(A) {:.3} flat regions {:?}",
            report.is_valid(),
            spec.f.lipschitz(),
            spec.a.lipschitz(),
            flats.intervals
        );
    }
    Ok(())
}

//! Approximate entropy inequalities for viscous solutions: every E^hyp and
//! E^par must stay above -R_visc - tol.

use vvlab::catalog::{self, CATALOG};
use vvlab::entropy::{
    audit_approximate_entropy, default_k_grid, default_test_functions, AuditSettings, TestFunction,
};
use vvlab::problem::flat_regions;
use vvlab::solver::{solve, SchemeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 1.0 / 64.0;
    for name in CATALOG {
        let spec = catalog::problem(name)?;
        let grid = spec.grid(200)?;
        let sol = solve(&spec, &grid, &SchemeConfig::for_problem(&spec, eps).with_slices(64))?;
        let w0 = &sol.field.slices[0].values;
        let lo = w0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = w0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ks = default_k_grid(lo, hi, 20, &flat_regions(&spec.a)?);
        let phis = default_test_functions(spec.xmin, spec.xmax, spec.horizon, 5)?;
        let refs: Vec<&dyn TestFunction> = phis.iter().map(|p| p as &dyn TestFunction).collect();
        let report = audit_approximate_entropy(&sol.field, &spec, &ks, &refs, eps, AuditSettings::default())?;
        let max_rvisc = report.rows.iter().map(|r| r.r_visc).fold(0.0, f64::max);
        println!(
            "{name:<20} rows {:>3}  failures {}  max R_visc {:.3e}",
            report.rows.len(),
            report.failures().count(),
            max_rvisc
        );
    }
    Ok(())
}

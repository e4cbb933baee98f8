//! Exact entropy audit of an inviscid solution, followed by the detector
//! check on a stationary expansion shock.

use vvlab::catalog;
use vvlab::entropy::{
    audit, default_k_grid, default_test_functions, AuditMode, AuditSettings, SeparableTestFn,
    TestFunction, TimeWindow,
};
use vvlab::mesh::{SpaceTimeField, TimeGrid};
use vvlab::problem::{flat_regions, InitialData};
use vvlab::solver::{solve, SchemeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "burgers_degenerate".into());
    let nx: usize = std::env::args().nth(2).map_or(Ok(400), |s| s.parse())?;
    let spec = catalog::problem(&name)?;
    let grid = spec.grid(nx)?;
    let sol = solve(&spec, &grid, &SchemeConfig::for_problem(&spec, 0.0).with_slices(64))?;
    let flats = flat_regions(&spec.a)?;
    let ks = default_k_grid(-0.9, 0.9, 20, &flats);
    let phis = default_test_functions(spec.xmin, spec.xmax, spec.horizon, 5)?;
    let refs: Vec<&dyn TestFunction> = phis.iter().map(|p| p as &dyn TestFunction).collect();
    let report = audit(&sol.field, &spec, &ks, &refs, 0.0, AuditMode::Exact, AuditSettings::default())?;
    println!("{report}");
    for r in report.rows.iter().filter(|r| r.phi_index == 2) {
        println!(
            "k {:>8.4}  E_hyp {:>11.4e}  E_par {:>11}  tol {:.3e}",
            r.k,
            r.e_hyp,
            r.e_par.map_or("k in H".to_string(), |v| format!("{v:.4e}")),
            r.tol
        );
    }

    // A stationary jump from -1 up to +1 violates the entropy condition.
    let mut bad = catalog::problem("burgers")?;
    bad.w0 = InitialData::pieces(vec![0.0], vec![-1.0, 1.0])?;
    let g = bad.grid(200)?;
    let w = SpaceTimeField::steady(&bad.initial_field(&g)?, TimeGrid::new(bad.horizon, 32)?);
    let phi = SeparableTestFn::new(0.0, 0.5, TimeWindow::new(0.05, 0.45, 0.025)?)?;
    let rep = audit(&w, &bad, &[0.0], &[&phi], 0.0, AuditMode::Exact, AuditSettings::default())?;
    let row = &rep.rows[0];
    println!(
        "expansion shock: E_hyp {:.4e} vs -tol {:.4e} -> {}",
        row.e_hyp,
        -row.tol,
        if row.pass_hyp { "not detected" } else { "rejected" }
    );
    Ok(())
}

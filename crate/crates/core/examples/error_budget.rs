//! The constant chain for one viscous solution: measured constants, the
//! viscous remainder bound and the approximation inequality.

use vvlab::budget::{approximation_inequality_check, check_rvisc_bound, measure_constants};
use vvlab::catalog;
use vvlab::entropy::{MollifierKernel, TestFnParams};
use vvlab::solver::{solve, SchemeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "variable_velocity".into());
    let spec = catalog::problem(&name)?;
    let eps = 1.0 / 64.0;
    let nx = 200;
    let t = spec.horizon;
    let reference = solve(&spec, &spec.grid(4 * nx)?, &SchemeConfig::for_problem(&spec, 0.0).with_slices(64))?.field;
    let w = solve(&spec, &spec.grid(nx)?, &SchemeConfig::for_problem(&spec, eps).with_slices(64))?.field;
    let budget = measure_constants(&reference, &w, &spec, eps, &MollifierKernel::standard());
    for (n, v, formula, _) in budget.ledger() {
        println!("{n:<6} {v:>12.5e}   {formula}");
    }
    println!(
        "r = sqrt(T eps) = {:.4}, exact minimizer r* = {:.4}, bound(r*) = {:.4e}",
        budget.r_choice,
        budget.r_star(),
        budget.bound_at(budget.r_star())
    );
    let r = (t * eps).sqrt();
    let params = TestFnParams::new(r, 0.25 * r, 0.5 * (0.1 * t - 0.25 * r), 0.1 * t, 0.9 * t, t)?;
    let rv = check_rvisc_bound(&w, &params, eps, &budget);
    println!("R_visc {:.4e} <= {:.4e}: {}", rv.measured, rv.bound, rv.pass);
    let ap = approximation_inequality_check(&reference, &w, &params, &budget, rv.measured, 1.0)?;
    println!(
        "|w_eps - w|(tau) {:.4e} <= {:.4e} (+ allowance {:.1e}): {}",
        ap.lhs, ap.rhs, ap.allowance, ap.pass
    );
    Ok(())
}

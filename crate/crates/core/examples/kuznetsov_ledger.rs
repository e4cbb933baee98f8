//! Doubled-variable remainders by windowed 4D quadrature on a small grid.
//! The time remainder shrinks with r0, the space remainder stays below
//! C1·r, and the cross term approaches the slice difference at τ and ν.

use vvlab::budget::kuznetsov_terms_4d;
use vvlab::catalog;
use vvlab::entropy::TestFnParams;
use vvlab::metrics::{l1_slice, sup_bv};
use vvlab::solver::{solve, SchemeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = catalog::problem("burgers_degenerate")?;
    let eps = 1.0 / 64.0;
    let nx = 96;
    let slices = 64;
    let grid = spec.grid(nx)?;
    let reference = solve(&spec, &spec.grid(4 * nx)?, &SchemeConfig::for_problem(&spec, 0.0).with_slices(slices))?
        .field
        .restrict_to(&grid)?;
    let w = solve(&spec, &grid, &SchemeConfig::for_problem(&spec, eps).with_slices(slices))?.field;
    let t = spec.horizon;
    let r = (t * eps).sqrt();
    let c1 = sup_bv(&reference, spec.bc);
    // The window ramp must span several stored slices to be resolved.
    for (r0, alpha0) in [(0.04, 0.009), (0.02, 0.009), (0.01, 0.009), (0.01, 0.02), (0.01, 0.035)] {
        let p = TestFnParams::new(r, r0, alpha0, 0.1 * t, 0.9 * t, t)?;
        let k = kuznetsov_terms_4d(&reference, &w, &p)?;
        let at = |s: f64| l1_slice(&w.slices[w.slice_index(s)], &reference.slices[w.slice_index(s)]);
        let jump = at(p.tau)? - at(p.nu)?;
        println!(
            "r0 {r0:<5} alpha0 {alpha0:<6} cross {:.4e} (slice difference {jump:.4e})  space {:.4e} (C1 r = {:.4e})  time {:.4e}",
            k.cross,
            k.space,
            c1 * r,
            k.time
        );
    }
    Ok(())
}

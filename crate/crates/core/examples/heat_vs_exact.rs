//! Solve the heat problem on refined grids and compare the final slice
//! with the error-function solution.

use vvlab::catalog;
use vvlab::mesh::Field;
use vvlab::metrics::l1_slice;
use vvlab::oracle::heat_exact;
use vvlab::solver::{solve, SchemeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = catalog::problem("heat")?;
    let eps = 0.01;
    let mut prev: Option<f64> = None;
    for nx in [50, 100, 200, 400] {
        let grid = spec.grid(nx)?;
        let sol = solve(&spec, &grid, &SchemeConfig::for_problem(&spec, eps).with_slices(8))?;
        let kappa = 1.0 + eps;
        let exact = Field::from_fn(grid, |x| heat_exact(&spec.w0, kappa, x, spec.horizon).unwrap())?;
        let err = l1_slice(sol.field.final_slice(), &exact)?;
        match prev {
            Some(p) => println!("nx {nx:>4}  L1 error {err:.3e}  ratio {:.2}", p / err),
            None => println!("nx {nx:>4}  L1 error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}

//! Burgers Riemann problems: a stationary shock and a rarefaction fan
//! against their exact entropy solutions.

use vvlab::mesh::Field;
use vvlab::metrics::l1_slice;
use vvlab::oracle::burgers_riemann;
use vvlab::problem::{BoundaryRule, InitialData, ProblemSpec, ScalarFn1D, VelocityProfile};
use vvlab::solver::{solve, SchemeConfig};

fn riemann(a: f64, b: f64) -> Result<ProblemSpec, vvlab::error::Error> {
    Ok(ProblemSpec {
        name: format!("riemann({a},{b})"),
        f: ScalarFn1D::sample(-1.0, 1.0, 200, |w| 0.5 * w * w)?,
        a: ScalarFn1D::new(vec![-1.0, 1.0], vec![0.0, 0.0])?,
        velocity: VelocityProfile::Constant(1.0),
        w0: InitialData::pieces(vec![0.0], vec![a, b])?,
        xmin: -1.0,
        xmax: 1.0,
        horizon: 0.5,
        bc: BoundaryRule::Outflow,
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (a, b) in [(1.0, -1.0), (-1.0, 1.0), (0.0, 1.0)] {
        let spec = riemann(a, b)?;
        for nx in [100, 200, 400] {
            let grid = spec.grid(nx)?;
            let sol = solve(&spec, &grid, &SchemeConfig::for_problem(&spec, 0.0).with_slices(4))?;
            let exact = Field::from_fn(grid, |x| burgers_riemann(a, b, x, spec.horizon))?;
            println!(
                "{:<16} nx {nx:>4}  final-slice L1 error {:.3e}",
                spec.name,
                l1_slice(sol.field.final_slice(), &exact)?
            );
        }
    }
    Ok(())
}

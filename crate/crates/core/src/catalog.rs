//! Named problem instances.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::problem::{BoundaryRule, InitialData, ProblemSpec, ScalarFn1D, VelocityProfile};

pub const CATALOG: [&str; 6] = [
    "advection",
    "burgers",
    "burgers_degenerate",
    "heat",
    "porous_medium",
    "variable_velocity",
];

/// Breakpoint count used for sampled nonlinear coefficients on `[-1, 1]`.
const SEGMENTS: usize = 200;

fn sampled(g: impl Fn(f64) -> f64) -> ScalarFn1D {
    ScalarFn1D::sample(-1.0, 1.0, SEGMENTS, g).expect("finite catalog samples")
}

fn linear(slope: f64) -> ScalarFn1D {
    ScalarFn1D::new(vec![-1.0, 0.0, 1.0], vec![-slope, 0.0, slope]).expect("finite")
}

fn burgers_flux() -> ScalarFn1D {
    sampled(|w| 0.5 * w * w)
}

/// `max(0, w - 1/4)²`: flat (hyperbolic) for `w <= 1/4`.
pub fn degenerate_diffusion() -> ScalarFn1D {
    sampled(|w| (w - 0.25).max(0.0).powi(2))
}

/// Opposite plateaus `a` on `[-1, 0)` and `-a` on `[0, 1)`, zero elsewhere.
pub fn plateau_pair(a: f64) -> InitialData {
    InitialData::PiecewiseConstant {
        breaks: vec![-1.0, 0.0, 1.0],
        values: vec![0.0, a, -a, 0.0],
    }
}

pub fn problem(name: &str) -> Result<ProblemSpec> {
    let spec = match name {
        "advection" => ProblemSpec {
            name: name.into(),
            f: linear(1.0),
            a: linear(0.0),
            velocity: VelocityProfile::Constant(1.0),
            w0: InitialData::boxed(-0.5, 0.5, 1.0),
            xmin: -1.0,
            xmax: 1.0,
            horizon: 1.0,
            bc: BoundaryRule::Periodic,
        },
        "burgers" => ProblemSpec {
            name: name.into(),
            f: burgers_flux(),
            a: linear(0.0),
            velocity: VelocityProfile::Constant(1.0),
            w0: plateau_pair(1.0),
            xmin: -2.0,
            xmax: 2.0,
            horizon: 0.5,
            bc: BoundaryRule::Outflow,
        },
        "burgers_degenerate" => ProblemSpec {
            name: name.into(),
            f: burgers_flux(),
            a: degenerate_diffusion(),
            velocity: VelocityProfile::Constant(1.0),
            w0: plateau_pair(0.9),
            xmin: -2.0,
            xmax: 2.0,
            horizon: 0.5,
            bc: BoundaryRule::Outflow,
        },
        "heat" => ProblemSpec {
            name: name.into(),
            f: linear(0.0),
            a: linear(1.0),
            velocity: VelocityProfile::Constant(1.0),
            w0: InitialData::boxed(-0.5, 0.5, 1.0),
            xmin: -2.0,
            xmax: 2.0,
            horizon: 0.05,
            bc: BoundaryRule::Outflow,
        },
        "porous_medium" => ProblemSpec {
            name: name.into(),
            f: linear(0.0),
            a: sampled(|w| w * w.abs()),
            velocity: VelocityProfile::Constant(1.0),
            w0: InitialData::boxed(-0.5, 0.5, 1.0),
            xmin: -2.0,
            xmax: 2.0,
            horizon: 0.5,
            bc: BoundaryRule::Outflow,
        },
        "variable_velocity" => ProblemSpec {
            name: name.into(),
            f: burgers_flux(),
            a: degenerate_diffusion(),
            velocity: VelocityProfile::Sine {
                mean: 1.0,
                amplitude: 0.3,
                wavenumber: PI,
            },
            w0: plateau_pair(0.9),
            xmin: -2.0,
            xmax: 2.0,
            horizon: 0.5,
            bc: BoundaryRule::Outflow,
        },
        other => {
            return Err(Error::Invalid(format!(
                "unknown problem '{other}' (catalog: {})",
                CATALOG.join(", ")
            )))
        }
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{flat_regions, validate_problem};

    #[test]
    fn catalog_is_valid() {
        for name in CATALOG {
            let p = problem(name).unwrap();
            assert!(validate_problem(&p).is_valid(), "{name}");
        }
        assert!(problem("nope").is_err());
    }

    #[test]
    fn degenerate_flat_part() {
        let p = problem("burgers_degenerate").unwrap();
        assert_eq!(flat_regions(&p.a).unwrap().intervals, vec![(-1.0, 0.25)]);
        let pm = problem("porous_medium").unwrap();
        assert!(flat_regions(&pm.a).unwrap().is_empty());
    }
}

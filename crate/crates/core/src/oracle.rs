//! Closed-form and brute-force references.

use crate::error::{Error, Result};
use crate::mesh::{Grid1D, Node, TimeGrid};
use crate::problem::InitialData;

/// Heat-kernel convolution of piecewise-constant data, diffusivity `kappa`.
///
/// For `u_t = κ u_xx` each jump of height `h` at `b` contributes
/// `h·erfc((b - x)/√(4κt))/2`.
pub fn heat_exact(w0: &InitialData, kappa: f64, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("heat_exact needs t > 0, got {t}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Invalid(format!("heat_exact needs kappa > 0, got {kappa}")));
    }
    let (breaks, values) = match w0 {
        InitialData::PiecewiseConstant { breaks, values } => (breaks, values),
        InitialData::Table(_) => {
            return Err(Error::Invalid("heat_exact needs piecewise-constant data".into()))
        }
    };
    let s = (4.0 * kappa * t).sqrt();
    let mut u = values[0];
    for (m, &b) in breaks.iter().enumerate() {
        let jump = values[m + 1] - values[m];
        u += jump * 0.5 * libm::erfc((b - x) / s);
    }
    Ok(u)
}

/// `w0(x - v0·t)`, wrapped into `[xmin, xmax)`.
pub fn advection_exact(
    w0: impl Fn(f64) -> f64,
    v0: f64,
    x: f64,
    t: f64,
    xmin: f64,
    xmax: f64,
) -> f64 {
    let len = xmax - xmin;
    let xi = (x - v0 * t - xmin).rem_euclid(len) + xmin;
    w0(xi)
}

/// Entropy solution of `u_t + (u²/2)_x = 0` for the jump `a | b` at `x = 0`.
pub fn burgers_riemann(a: f64, b: f64, x: f64, t: f64) -> f64 {
    if a > b {
        if x < 0.5 * (a + b) * t {
            a
        } else {
            b
        }
    } else if x <= a * t {
        a
    } else if x >= b * t {
        b
    } else {
        x / t
    }
}

/// [`crate::mesh::quad_qt`] on a grid `m` times finer in space and time.
pub fn brute_quadrature(
    grid: &Grid1D,
    tgrid: &TimeGrid,
    m: usize,
    eval: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    if m < 2 {
        return Err(Error::Invalid(format!("brute_quadrature needs m >= 2, got {m}")));
    }
    let g = grid.refined(m)?;
    let tg = TimeGrid::new(tgrid.horizon, tgrid.nt * m)?;
    Ok(crate::mesh::quad_qt(&g, &tg, |n: Node| eval(n.x, n.t)))
}

//! L¹ distances, total variation, and log-log rate fitting.

use crate::error::{Error, Result};
use crate::mesh::{Field, SpaceTimeField};
use crate::problem::BoundaryRule;

/// Bring `u` and `v` onto the coarser of their two grids.
fn common(u: &Field, v: &Field) -> Result<(Field, Field)> {
    if u.grid.nx <= v.grid.nx {
        Ok((u.clone(), v.restrict_to(&u.grid)?))
    } else {
        Ok((u.restrict_to(&v.grid)?, v.clone()))
    }
}

/// `∫ |u - v| dx`, restricting the finer field by cell averages.
pub fn l1_slice(u: &Field, v: &Field) -> Result<f64> {
    let (a, b) = common(u, v)?;
    let dx = a.grid.dx();
    let mut s = 0.0;
    for (p, q) in a.values.iter().zip(&b.values) {
        s += (p - q).abs() * dx;
    }
    Ok(s)
}

/// `∬ |u - v| dx dt` with the trapezoid rule in time.
pub fn l1_qt(u: &SpaceTimeField, v: &SpaceTimeField) -> Result<f64> {
    if u.tgrid.nt != v.tgrid.nt || u.tgrid.horizon != v.tgrid.horizon {
        return Err(Error::GridMismatch(format!(
            "slice times differ: nt {} vs {}, T {} vs {}",
            u.tgrid.nt, v.tgrid.nt, u.tgrid.horizon, v.tgrid.horizon
        )));
    }
    let mut s = 0.0;
    for j in 0..=u.tgrid.nt {
        let (a, b) = common(&u.slices[j], &v.slices[j])?;
        let w = a.grid.dx() * u.tgrid.weight(j);
        for (p, q) in a.values.iter().zip(&b.values) {
            s += (p - q).abs() * w;
        }
    }
    Ok(s)
}

/// Per-slice L¹ distances.
pub fn l1_per_slice(u: &SpaceTimeField, v: &SpaceTimeField) -> Result<Vec<f64>> {
    if u.tgrid.nt != v.tgrid.nt {
        return Err(Error::GridMismatch("slice counts differ".into()));
    }
    u.slices
        .iter()
        .zip(&v.slices)
        .map(|(a, b)| l1_slice(a, b))
        .collect()
}

/// `Σ |u_{i+1} - u_i|`, wrapping around under periodic boundaries.
///
/// Each difference is split exactly and the pieces are summed with correct
/// rounding, so a total variation that does not grow in exact arithmetic
/// never grows in the computed value either.
pub fn bv_seminorm(u: &Field, bc: BoundaryRule) -> f64 {
    let v = &u.values;
    let mut terms = Vec::with_capacity(2 * v.len());
    let mut push = |a: f64, b: f64| {
        let (d, e) = two_sum(b, -a);
        let sign = if d < 0.0 { -1.0 } else { 1.0 };
        terms.push(sign * d);
        terms.push(sign * e);
    };
    for p in v.windows(2) {
        push(p[0], p[1]);
    }
    if bc == BoundaryRule::Periodic {
        push(v[v.len() - 1], v[0]);
    }
    exact_sum(&terms)
}

/// `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Correctly rounded sum (Shewchuk's nonoverlapping partials with a
/// half-even final correction).
pub fn exact_sum(xs: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &x0 in xs {
        let mut x = x0;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = 2.0 * lo;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// `sup_t TV(u(·, t))` over stored slices.
pub fn sup_bv(u: &SpaceTimeField, bc: BoundaryRule) -> f64 {
    u.slices
        .iter()
        .map(|s| bv_seminorm(s, bc))
        .fold(0.0, f64::max)
}

/// Least-squares fit of `e ≈ C ε^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub log_c: f64,
    /// Largest relative deviation `|e_j / (C ε_j^p) - 1|`.
    pub residual: f64,
    /// `max_j e_j / √ε_j`.
    pub c_hat: f64,
    /// `min_j e_j / √ε_j`.
    pub c_min: f64,
}

impl RateFit {
    pub fn predict(&self, eps: f64) -> f64 {
        (self.log_c + self.slope * eps.ln()).exp()
    }
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::Invalid(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(e, v)) = points.iter().find(|(e, v)| !(*e > 0.0 && *v > 0.0)) {
        return Err(Error::Invalid(format!(
            "rate fit needs positive data, got ({e}, {v})"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Invalid("rate fit needs distinct eps values".into()));
    }
    let slope = sxy / sxx;
    let log_c = my - slope * mx;
    let mut fit = RateFit {
        slope,
        log_c,
        residual: 0.0,
        c_hat: f64::NEG_INFINITY,
        c_min: f64::INFINITY,
    };
    for &(e, v) in points {
        fit.residual = fit.residual.max((v / fit.predict(e) - 1.0).abs());
        let c = v / e.sqrt();
        fit.c_hat = fit.c_hat.max(c);
        fit.c_min = fit.c_min.min(c);
    }
    Ok(fit)
}

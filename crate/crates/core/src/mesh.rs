//! Uniform space-time grids, gridded fields and deterministic quadrature.
//!
//! Space is discretized by cell centers (midpoint rule), time by stored
//! slices (trapezoid rule with half-weight endpoints).

use crate::error::{Error, Result};

/// Uniform cell-centered grid on `[xmin, xmax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub xmin: f64,
    pub xmax: f64,
    pub nx: usize,
}

impl Grid1D {
    pub fn new(xmin: f64, xmax: f64, nx: usize) -> Result<Self> {
        if nx < 4 {
            return Err(Error::Invalid(format!("grid needs nx >= 4, got {nx}")));
        }
        if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) {
            return Err(Error::Invalid(format!("empty domain [{xmin}, {xmax}]")));
        }
        Ok(Self { xmin, xmax, nx })
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / self.nx as f64
    }

    pub fn length(&self) -> f64 {
        self.xmax - self.xmin
    }

    /// Cell center `x_i = xmin + (i + 1/2) dx`.
    pub fn center(&self, i: usize) -> f64 {
        self.xmin + (i as f64 + 0.5) * self.dx()
    }

    /// Interface `x_{i-1/2}`; `interface(0) = xmin`, `interface(nx) = xmax`.
    pub fn interface(&self, i: usize) -> f64 {
        if i == self.nx {
            self.xmax
        } else {
            self.xmin + i as f64 * self.dx()
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.center(i)).collect()
    }

    /// Grid with `factor` times as many cells on the same interval.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.xmin, self.xmax, self.nx * factor)
    }

    /// Integer `q` with `fine.nx == q * self.nx` on the same interval.
    pub fn refinement_factor(&self, fine: &Grid1D) -> Result<usize> {
        let same_interval = (self.xmin - fine.xmin).abs() <= 1e-12 * self.length()
            && (self.xmax - fine.xmax).abs() <= 1e-12 * self.length();
        if !same_interval || fine.nx % self.nx != 0 {
            return Err(Error::GridMismatch(format!(
                "grid nx={} on [{}, {}] is not an integer refinement of nx={} on [{}, {}]",
                fine.nx, fine.xmin, fine.xmax, self.nx, self.xmin, self.xmax
            )));
        }
        Ok(fine.nx / self.nx)
    }
}

/// Uniform time grid `t_j = j T / nt`, `j = 0..=nt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub nt: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, nt: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) || nt == 0 {
            return Err(Error::Invalid(format!(
                "time grid needs T > 0 and nt >= 1 (T={horizon}, nt={nt})"
            )));
        }
        Ok(Self { horizon, nt })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.nt {
            self.horizon
        } else {
            self.horizon * j as f64 / self.nt as f64
        }
    }

    /// Trapezoid weight of slice `j`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.nt {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
}

/// One value per cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx {
            return Err(Error::GridMismatch(format!(
                "field has {} values for nx={}",
                values.len(),
                grid.nx
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite field value at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.nx],
        }
    }

    pub fn from_fn(grid: Grid1D, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().into_iter().map(g).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell-average restriction onto a grid `factor` times coarser.
    pub fn restrict(&self, factor: usize) -> Result<Field> {
        if factor == 0 || self.grid.nx % factor != 0 || self.grid.nx / factor < 4 {
            return Err(Error::GridMismatch(format!(
                "cannot restrict nx={} by factor {factor}",
                self.grid.nx
            )));
        }
        let coarse = Grid1D::new(self.grid.xmin, self.grid.xmax, self.grid.nx / factor)?;
        let values = self
            .values
            .chunks_exact(factor)
            .map(|c| {
                let mut s = 0.0;
                for v in c {
                    s += v;
                }
                s / factor as f64
            })
            .collect();
        Ok(Field {
            grid: coarse,
            values,
        })
    }

    /// Restrict onto `target` (which must be coarser by an integer factor).
    pub fn restrict_to(&self, target: &Grid1D) -> Result<Field> {
        let q = target.refinement_factor(&self.grid)?;
        if q == 1 {
            Ok(self.clone())
        } else {
            self.restrict(q)
        }
    }
}

/// Gridded `w(x,t)` on `Q_T`: `nt + 1` slices at times `j T / nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: Grid1D,
    pub tgrid: TimeGrid,
    pub slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid1D, tgrid: TimeGrid, slices: Vec<Field>) -> Result<Self> {
        if slices.len() != tgrid.nt + 1 {
            return Err(Error::GridMismatch(format!(
                "{} slices for nt={}",
                slices.len(),
                tgrid.nt
            )));
        }
        if slices.iter().any(|s| s.grid != grid) {
            return Err(Error::GridMismatch("slices on differing grids".into()));
        }
        Ok(Self {
            grid,
            tgrid,
            slices,
        })
    }

    /// Field built by evaluating `g(x, t)` at every node.
    pub fn from_fn(grid: Grid1D, tgrid: TimeGrid, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let slices = (0..=tgrid.nt)
            .map(|j| {
                let t = tgrid.time(j);
                Field::from_fn(grid, |x| g(x, t))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, tgrid, slices)
    }

    /// The same field at every stored time.
    pub fn steady(field: &Field, tgrid: TimeGrid) -> Self {
        Self {
            grid: field.grid,
            tgrid,
            slices: vec![field.clone(); tgrid.nt + 1],
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.slices[j].values[i]
    }

    pub fn final_slice(&self) -> &Field {
        self.slices.last().expect("at least one slice")
    }

    /// Index of the stored slice closest to time `t`.
    pub fn slice_index(&self, t: f64) -> usize {
        let j = (t / self.tgrid.dt()).round();
        (j.max(0.0) as usize).min(self.tgrid.nt)
    }

    pub fn min(&self) -> f64 {
        self.slices.iter().map(Field::min).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.slices.iter().map(Field::max).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.slices.iter().map(Field::sup_norm).fold(0.0, f64::max)
    }

    pub fn restrict_to(&self, target: &Grid1D) -> Result<SpaceTimeField> {
        let slices = self
            .slices
            .iter()
            .map(|s| s.restrict_to(target))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpaceTimeField {
            grid: *target,
            tgrid: self.tgrid,
            slices,
        })
    }

    /// Keep every `stride`-th stored slice.
    pub fn subsample_time(&self, stride: usize) -> Result<SpaceTimeField> {
        if stride == 0 || self.tgrid.nt % stride != 0 {
            return Err(Error::GridMismatch(format!(
                "cannot subsample nt={} by {stride}",
                self.tgrid.nt
            )));
        }
        let tgrid = TimeGrid::new(self.tgrid.horizon, self.tgrid.nt / stride)?;
        let slices = self.slices.iter().step_by(stride).cloned().collect();
        SpaceTimeField::new(self.grid, tgrid, slices)
    }
}

/// A quadrature node on `Q_T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub t: f64,
}

/// Midpoint-in-space, trapezoid-in-time realization of `∬_{Q_T} g dt dx`.
///
/// Summation order is slice-major, then cell index, with a single
/// accumulator.
pub fn quad_qt(grid: &Grid1D, tgrid: &TimeGrid, eval: impl Fn(Node) -> f64) -> f64 {
    let dx = grid.dx();
    let mut total = 0.0;
    for j in 0..=tgrid.nt {
        let t = tgrid.time(j);
        let wt = tgrid.weight(j);
        for i in 0..grid.nx {
            let x = grid.center(i);
            total += eval(Node { i, j, x, t }) * dx * wt;
        }
    }
    total
}

/// Compact-support hint for doubled-variable integrands: the evaluator
/// vanishes whenever `|x - y| >= r` or `|t - s| >= r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportHint {
    pub r: f64,
    pub r0: f64,
}

/// Realization of `∬∬_{Q_T × Q_T} g dt dx ds dy`.
///
/// The `(x,t)` node is the outer loop, `(y,s)` the inner one, both in
/// lexicographic (time, cell) order. With a hint, only pairs with
/// `|x - y| < r` and `|t - s| < r0` are visited; because skipped terms of a
/// compactly supported evaluator are exact zeros, the result is bit-identical
/// to the unhinted sum.
pub fn quad_qtqt(
    grid: &Grid1D,
    tgrid: &TimeGrid,
    hint: Option<SupportHint>,
    eval: impl Fn(Node, Node) -> f64,
) -> f64 {
    let dx = grid.dx();
    let nx = grid.nx as isize;
    let nt = tgrid.nt as isize;
    let (mx, mt) = match hint {
        Some(h) => (
            (h.r / dx).ceil() as isize + 1,
            (h.r0 / tgrid.dt()).ceil() as isize + 1,
        ),
        None => (nx, nt + 1),
    };
    let mut total = 0.0;
    for j in 0..=tgrid.nt {
        let t = tgrid.time(j);
        let wt = tgrid.weight(j);
        let l_lo = (j as isize - mt).max(0) as usize;
        let l_hi = (j as isize + mt).min(nt) as usize;
        for i in 0..grid.nx {
            let x = grid.center(i);
            let outer = Node { i, j, x, t };
            let k_lo = (i as isize - mx).max(0) as usize;
            let k_hi = (i as isize + mx).min(nx - 1) as usize;
            for l in l_lo..=l_hi {
                let s = tgrid.time(l);
                if let Some(h) = hint {
                    if (t - s).abs() >= h.r0 {
                        continue;
                    }
                }
                let ws = tgrid.weight(l);
                for k in k_lo..=k_hi {
                    let y = grid.center(k);
                    if let Some(h) = hint {
                        if (x - y).abs() >= h.r {
                            continue;
                        }
                    }
                    total += eval(outer, Node { i: k, j: l, x: y, t: s }) * dx * wt * dx * ws;
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_centers_reach_last_cell() {
        let g = Grid1D::new(-2.0, 2.0, 400).unwrap();
        assert!((g.center(399) - (2.0 - 0.5 * g.dx())).abs() < 1e-14);
        assert_eq!(g.interface(400), 2.0);
        assert!(Grid1D::new(0.0, 1.0, 3).is_err());
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn time_grid_hits_horizon() {
        let tg = TimeGrid::new(0.3, 7).unwrap();
        assert_eq!(tg.time(7), 0.3);
        assert!((tg.dt() * 7.0 - 0.3).abs() <= 1e-12 * 0.3);
        let total: f64 = (0..=7).map(|j| tg.weight(j)).sum();
        assert!((total - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quad_qt_measure_and_linear() {
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        let tg = TimeGrid::new(1.0, 10).unwrap();
        assert!((quad_qt(&g, &tg, |_| 1.0) - 1.0).abs() < 1e-14);
        let q = quad_qt(&g, &tg, |n| n.x);
        assert!((q - 0.5).abs() <= g.dx() * g.dx());
    }

    #[test]
    fn quad_qt_sine_against_fine_reference() {
        // ∫∫ sin(πx) t = (2/π)(1/2); composite error O(dx^2 + dt^2).
        let g = Grid1D::new(0.0, 1.0, 64).unwrap();
        let tg = TimeGrid::new(1.0, 64).unwrap();
        let q = quad_qt(&g, &tg, |n| (std::f64::consts::PI * n.x).sin() * n.t);
        let exact = 2.0 / std::f64::consts::PI * 0.5;
        assert!((q - exact).abs() < 2e-4, "{q} vs {exact}");
    }

    #[test]
    fn quad_qtqt_window_measure() {
        let g = Grid1D::new(0.0, 1.0, 8).unwrap();
        let tg = TimeGrid::new(1.0, 8).unwrap();
        let hint = SupportHint { r: 0.2, r0: 0.2 };
        let windowed = quad_qtqt(&g, &tg, Some(hint), |_, _| 1.0);
        let brute = quad_qtqt(&g, &tg, None, |a, b| {
            if (a.x - b.x).abs() < 0.2 && (a.t - b.t).abs() < 0.2 {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(windowed, brute);
        assert!(windowed > 0.0);
    }

    #[test]
    fn restriction_averages() {
        let g = Grid1D::new(0.0, 1.0, 8).unwrap();
        let f = Field::new(g, (0..8).map(|i| i as f64).collect()).unwrap();
        let c = f.restrict(2).unwrap();
        assert_eq!(c.values, vec![0.5, 2.5, 4.5, 6.5]);
        assert!(f.restrict(3).is_err());
    }
}

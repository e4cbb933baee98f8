//! CSV persistence for fields.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid1D, SpaceTimeField, TimeGrid};
use crate::problem::read_columns;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Snapshot with header `x,w`.
pub fn write_field_csv<W: Write>(field: &Field, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "w"])?;
    for (i, v) in field.values.iter().enumerate() {
        w.write_record([fmt_f64(field.grid.center(i)), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Every stored slice, header `t,x,w`, slice-major.
pub fn write_space_time_csv<W: Write>(field: &SpaceTimeField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "w"])?;
    for (j, s) in field.slices.iter().enumerate() {
        let t = fmt_f64(field.tgrid.time(j));
        for (i, v) in s.values.iter().enumerate() {
            w.write_record([t.clone(), fmt_f64(field.grid.center(i)), fmt_f64(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_space_time_csv`]: rows must be slice-major on uniform
/// cell centers and uniform times starting at 0.
pub fn read_space_time_csv(path: &Path) -> Result<SpaceTimeField> {
    let cols = read_columns(path, &["t", "x", "w"])?;
    let (t, x, w) = (&cols[0], &cols[1], &cols[2]);
    if t.is_empty() {
        return Err(Error::InvalidTable(format!("{}: no rows", path.display())));
    }
    let nx = t.iter().take_while(|&&v| v == t[0]).count();
    if nx < 4 || t.len() % nx != 0 {
        return Err(Error::InvalidTable(format!(
            "{}: {} rows do not form slices of equal length",
            path.display(),
            t.len()
        )));
    }
    let ns = t.len() / nx;
    if ns < 2 {
        return Err(Error::InvalidTable(format!("{}: need at least two slices", path.display())));
    }
    let dx = (x[nx - 1] - x[0]) / (nx - 1) as f64;
    let grid = Grid1D::new(x[0] - 0.5 * dx, x[nx - 1] + 0.5 * dx, nx)?;
    let horizon = t[t.len() - 1];
    let tgrid = TimeGrid::new(horizon, ns - 1)?;
    let tol = 1e-9 * (grid.length() + horizon);
    let mut slices = Vec::with_capacity(ns);
    for j in 0..ns {
        let rows = j * nx..(j + 1) * nx;
        for r in rows.clone() {
            let i = r - j * nx;
            if (t[r] - tgrid.time(j)).abs() > tol || (x[r] - grid.center(i)).abs() > tol {
                return Err(Error::InvalidTable(format!(
                    "{}: row {} is off the uniform grid",
                    path.display(),
                    r + 2
                )));
            }
        }
        slices.push(Field::new(grid, w[rows].to_vec())?);
    }
    SpaceTimeField::new(grid, tgrid, slices)
}

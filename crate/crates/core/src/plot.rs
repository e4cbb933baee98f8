//! Log-log SVG of a rate table.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{fit_rate, RateFit};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;

/// `(eps, l1_qt_error)` pairs from a `rates.csv`.
pub fn read_rates(path: &Path) -> Result<Vec<(f64, f64)>> {
    let cols = crate::problem::read_columns(path, &["eps", "l1_qt_error"])?;
    let pts: Vec<(f64, f64)> = cols[0].iter().copied().zip(cols[1].iter().copied()).collect();
    if pts.is_empty() {
        return Err(Error::InvalidTable(format!("{}: no rows", path.display())));
    }
    if pts.iter().any(|&(e, v)| !(e > 0.0) || !(v > 0.0)) {
        return Err(Error::InvalidTable(format!(
            "{}: eps and error must be positive for a log-log plot",
            path.display()
        )));
    }
    Ok(pts)
}

/// Markers for the data, the fitted line (with at least three points) and
/// the guide `c_hat·√ε`, which bounds every marker from above.
pub fn rates_svg(points: &[(f64, f64)]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Invalid("nothing to plot".into()));
    }
    let fit: Option<RateFit> = if points.len() >= 3 {
        Some(fit_rate(points)?)
    } else {
        None
    };
    let c_hat = points
        .iter()
        .map(|&(e, v)| v / e.sqrt())
        .fold(0.0f64, f64::max);
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let (mut x0, mut x1) = bounds(&lx);
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let mut ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    for x in [x0, x1] {
        ly.push((c_hat * 10f64.powf(x).sqrt()).log10());
        if let Some(f) = &fit {
            ly.push(f.predict(10f64.powf(x)).log10());
        }
    }
    let (mut y0, mut y1) = bounds(&ly);
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{m} {m} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">log10 eps</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {})">log10 L1 error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (x, label) in [(x0, x0), (x1, x1)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{label:.2}</text>"#,
            px(x),
            HEIGHT - MARGIN + 16.0
        );
    }
    for (y, label) in [(y0, y0), (y1, y1)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{label:.2}</text>"#,
            MARGIN - 6.0,
            py(y) + 4.0
        );
    }
    let guide = |x: f64| (c_hat * 10f64.powf(x).sqrt()).log10();
    let _ = writeln!(
        s,
        r#"<line class="guide" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        px(x0),
        py(guide(x0)),
        px(x1),
        py(guide(x1))
    );
    if let Some(f) = &fit {
        let fy = |x: f64| f.predict(10f64.powf(x)).log10();
        let _ = writeln!(
            s,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="2"/>"#,
            px(x0),
            py(fy(x0)),
            px(x1),
            py(fy(x1))
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">slope {:.3}, c_hat {:.3}</text>"#,
            MARGIN + 10.0,
            MARGIN - 10.0,
            f.slope,
            c_hat
        );
    }
    for (&x, &(_, v)) in lx.iter().zip(points) {
        let _ = writeln!(
            s,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
            px(x),
            py(v.log10())
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Read `rates` and write the SVG to `out`.
pub fn emit_plot(rates: &Path, out: &Path) -> Result<()> {
    let svg = rates_svg(&read_rates(rates)?)?;
    std::fs::write(out, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(s: &str, pat: &str) -> usize {
        s.matches(pat).count()
    }

    #[test]
    fn three_points_three_markers_two_lines() {
        let pts: Vec<(f64, f64)> = [0.1, 0.01, 0.001].iter().map(|&e: &f64| (e, 3.0 * e.powf(0.6))).collect();
        let s = rates_svg(&pts).unwrap();
        assert_eq!(count(&s, "<circle"), 3);
        assert_eq!(count(&s, "<line"), 2);
    }

    #[test]
    fn exact_sqrt_data_gives_parallel_lines() {
        let pts: Vec<(f64, f64)> = [0.1, 0.01, 0.001].iter().map(|&e: &f64| (e, 2.0 * e.sqrt())).collect();
        let s = rates_svg(&pts).unwrap();
        let coords = |class: &str| -> Vec<f64> {
            let line = s.lines().find(|l| l.contains(class)).unwrap();
            ["x1", "y1", "x2", "y2"]
                .iter()
                .map(|k| {
                    let tag = format!(" {k}=\"");
                    let a = line.find(&tag).unwrap() + tag.len();
                    line[a..].split('"').next().unwrap().parse().unwrap()
                })
                .collect()
        };
        let g = coords("class=\"guide\"");
        let f = coords("class=\"fit\"");
        let sg = (g[3] - g[1]) / (g[2] - g[0]);
        let sf = (f[3] - f[1]) / (f[2] - f[0]);
        assert!((sg - sf).abs() < 1e-3);
    }

    #[test]
    fn rejects_nonpositive() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rates.csv");
        std::fs::write(&p, "eps,l1_qt_error\n0.1,0\n").unwrap();
        assert!(read_rates(&p).is_err());
        std::fs::write(&p, "eps,err\n0.1,1\n").unwrap();
        assert!(read_rates(&p).is_err());
    }
}

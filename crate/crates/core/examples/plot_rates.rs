//! Write a log-log SVG from a rates table, or from synthetic data when no
//! path is given.

use std::path::PathBuf;

use vvlab::plot::{emit_plot, rates_svg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("vvlab_rates.svg");
    match std::env::args().nth(1) {
        Some(p) => emit_plot(&PathBuf::from(p), &out)?,
        None => {
            let pts: Vec<(f64, f64)> = (4..=9)
                .map(|p| {
                    let e = 2f64.powi(-p);
                    (e, 0.5 * e.powf(0.7))
                })
                .collect();
            std::fs::write(&out, rates_svg(&pts)?)?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

//! Viscosity sweep against a refined inviscid reference, with the fitted
//! rate. Pass a problem name and `nx` to override the defaults.

use vvlab::config::parse_config;
use vvlab::experiment::run_sweep;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "burgers_degenerate".into());
    let nx: usize = std::env::args().nth(2).map_or(Ok(200), |s| s.parse())?;
    let out = std::env::temp_dir().join(format!("vvlab_sweep_{name}"));
    let text = format!(
        "problem = {name}\nnx = {nx}\nref_refine = 4\neps_list = 0.0625, 0.03125, 0.015625, 0.0078125\noutput_slices = 64\n"
    );
    let cfg = parse_config(&text)?;
    let s = run_sweep(&cfg, &out)?;
    for m in &s.members {
        println!(
            "eps {:.5}  L1(Q_T) {:.4e}  final slice {:.4e}  err/sqrt(eps) {:.4}",
            m.eps,
            m.l1_qt_error,
            m.l1_final_slice,
            m.err_over_sqrt_eps()
        );
    }
    if let Some(f) = &s.fit {
        println!("slope {:.4}  c_hat {:.4}  c_hat/c_min {:.3}", f.slope, f.c_hat, f.c_hat / f.c_min);
    }
    println!(
        "reference self-convergence {:.3e}, outputs in {}",
        s.ref_self_error,
        out.display()
    );
    Ok(())
}

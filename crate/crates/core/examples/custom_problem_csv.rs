//! Load a problem from coefficient and profile tables, validate it and run
//! a short viscous solve.

use vvlab::problem::{flat_regions, validate_problem, BoundaryRule, ProblemSpec};
use vvlab::solver::{solve, SchemeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("vvlab_custom");
    std::fs::create_dir_all(&dir)?;
    let coeffs = dir.join("coeffs.csv");
    let profile = dir.join("profile.csv");
    let mut c = String::from("w,f,a\n");
    for m in 0..=40 {
        let w = -1.0 + m as f64 / 20.0;
        let a = if w > 0.0 { 0.5 * w } else { 0.0 };
        c.push_str(&format!("{w},{},{a}\n", 0.5 * w * w));
    }
    std::fs::write(&coeffs, c)?;
    let mut p = String::from("x,v,w0\n");
    for m in 0..=80 {
        let x = -2.0 + m as f64 / 20.0;
        let w0 = if x.abs() < 0.5 { 0.8 } else { 0.0 };
        p.push_str(&format!("{x},{},{w0}\n", 1.0 + 0.2 * x.sin()));
    }
    std::fs::write(&profile, p)?;

    let spec = ProblemSpec::from_csv("custom", &coeffs, &profile, 0.4, BoundaryRule::Outflow)?;
    println!("{}", validate_problem(&spec));
    println!("flat regions {:?}", flat_regions(&spec.a)?.intervals);
    let sol = solve(&spec, &spec.grid(200)?, &SchemeConfig::for_problem(&spec, 0.01).with_slices(16))?;
    let last = sol.field.final_slice();
    let mass: f64 = last.values.iter().sum::<f64>() * last.grid.dx();
    println!("{} steps, dt {:.3e}, final mass {mass:.6}", sol.steps, sol.dt);
    Ok(())
}

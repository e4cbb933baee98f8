//! Finite-difference residuals of the doubled test function identities,
//! showing second-order decay in the probe step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vvlab::entropy::{phi_identity_residuals, Probe, TestFnParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = TestFnParams::new(0.1, 0.02, 0.03, 0.1, 0.9, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let probes: Vec<Probe> = (0..100)
        .map(|m| {
            let x = rng.gen_range(-0.5..0.5);
            let edge = if m % 2 == 0 { p.nu } else { p.tau };
            let t = edge + rng.gen_range(-0.9..0.9) * p.alpha0;
            Probe {
                x,
                t,
                y: x + rng.gen_range(-0.9..0.9) * p.r,
                s: t + rng.gen_range(-0.9..0.9) * p.r0,
            }
        })
        .collect();
    println!("phi at the peak: {:.6e}", p.phi(0.0, 0.5, 0.0, 0.5));
    let mut prev: Option<(f64, f64)> = None;
    for h in [0.08, 0.04, 0.02, 0.01, 0.005] {
        let r = phi_identity_residuals(&p, &probes, h);
        match prev {
            Some((t, s)) => println!(
                "h {h:<6} time {:.3e} (ratio {:.2})  space {:.3e} (ratio {:.2})",
                r.time,
                t / r.time,
                r.space,
                s / r.space
            ),
            None => println!("h {h:<6} time {:.3e}  space {:.3e}", r.time, r.space),
        }
        prev = Some((r.time, r.space));
    }
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vvlab::config::{parse_config, RunConfig};
use vvlab::error::Error;
use vvlab::experiment::{checked_spec, run_budget, run_entropy_audit, run_solve, run_sweep};
use vvlab::plot::emit_plot;
use vvlab::problem::{flat_regions, validate_problem};

#[derive(Parser)]
#[command(name = "vvlab", version, about = "Vanishing-viscosity laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the problem against the standing hypotheses.
    Validate(Common),
    /// Solve every configured viscosity and store the fields.
    Solve(Common),
    /// Run the viscosity sweep and fit the rate.
    Sweep(Common),
    /// Audit the entropy inequalities.
    Entropy(Common),
    /// Measure the constant chain and check its inequalities.
    Budget(Common),
    /// Plot `rates.csv` from the output directory.
    Plot(Common),
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERDICT: u8 = 4;

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config { .. }
        | Error::Invalid(_)
        | Error::InvalidTable(_)
        | Error::NotMonotone(_)
        | Error::Io(_)
        | Error::Csv(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_NUMERIC),
    }
}

fn load(c: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let text = std::fs::read_to_string(&c.config)?;
    let cfg = parse_config(&text)?;
    let out = c.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT)
    }
}

fn run(cmd: &Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Validate(c) => {
            let (cfg, _) = load(c)?;
            let spec = cfg.spec()?;
            let report = validate_problem(&spec);
            println!("{report}");
            if !report.is_valid() {
                return Ok(ExitCode::from(EXIT_CONFIG));
            }
            println!("flat regions of A: {:?}", flat_regions(&spec.a)?.intervals);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve(c) => {
            let (cfg, out) = load(c)?;
            for (eps, sol) in run_solve(&cfg, &out)? {
                println!(
                    "eps {eps:e}: {} steps, dt {:.3e}, margin violated {}",
                    sol.steps, sol.dt, sol.margin_violated
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep(c) => {
            let (cfg, out) = load(c)?;
            let s = run_sweep(&cfg, &out)?;
            for m in &s.members {
                println!(
                    "eps {:.4e}  L1(Q_T) {:.4e}  err/sqrt(eps) {:.4}",
                    m.eps,
                    m.l1_qt_error,
                    m.err_over_sqrt_eps()
                );
            }
            if let Some(f) = &s.fit {
                println!(
                    "slope {:.4}  c_hat {:.4}  c_hat/c_min {:.3}",
                    f.slope,
                    f.c_hat,
                    f.c_hat / f.c_min
                );
            }
            println!(
                "reference self-convergence {:.3e} ({})",
                s.ref_self_error,
                if s.ref_check_pass { "ok" } else { "above 10% of the smallest error" }
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Entropy(c) => {
            let (cfg, out) = load(c)?;
            let report = run_entropy_audit(&cfg, &out)?;
            println!("{report}");
            Ok(verdict(report.all_pass()))
        }
        Cmd::Budget(c) => {
            let (cfg, out) = load(c)?;
            checked_spec(&cfg)?;
            let b = run_budget(&cfg, &out)?;
            for m in &b.members {
                println!(
                    "eps {:.4e}  C6 {:.4}  bound {:.4e}  Rvisc {:.3e} <= {:.3e} {}  approx lhs {:.3e} rhs {:.3e} {}",
                    m.eps,
                    m.budget.c6,
                    m.budget.bound,
                    m.rvisc.measured,
                    m.rvisc.bound,
                    m.rvisc.pass,
                    m.approx.lhs,
                    m.approx.rhs,
                    m.approx.pass
                );
            }
            Ok(verdict(b.all_pass()))
        }
        Cmd::Plot(c) => {
            let (_, out) = load(c)?;
            let svg = out.join("rates.svg");
            emit_plot(&out.join("rates.csv"), &svg)?;
            println!("wrote {}", display(&svg));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(code) => code,
        Err(e) => exit_for(&e),
    }
}

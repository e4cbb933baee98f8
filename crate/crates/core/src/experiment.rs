//! Sweeps, audits and budgets driven by a [`RunConfig`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::budget::{
    approximation_inequality_check, check_rvisc_bound, kuznetsov_terms_4d, measure_constants,
    ApproxLedger, ErrorBudget, KuznetsovTerms, RviscCheck, MAX_4D_NX, MAX_4D_SLICES,
};
use crate::config::RunConfig;
use crate::entropy::{
    audit, default_k_grid, AuditMode, EntropyReport, MollifierKernel, SeparableTestFn,
    TestFunction, TimeWindow,
};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, read_space_time_csv, write_space_time_csv};
use crate::mesh::SpaceTimeField;
use crate::metrics::{fit_rate, l1_qt, l1_slice, RateFit};
use crate::problem::{flat_regions, validate_problem, ProblemSpec};
use crate::solver::{solve, Solution};

pub const THREADS_ENV: &str = "VVLAB_THREADS";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Reference self-convergence must stay below this share of the smallest error.
pub const REF_CHECK_FRACTION: f64 = 0.1;

/// Run `f` on a pool capped by `VVLAB_THREADS` when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

/// Validated problem for a configuration; hypothesis violations are errors.
pub fn checked_spec(cfg: &RunConfig) -> Result<ProblemSpec> {
    let spec = cfg.spec()?;
    let report = validate_problem(&spec);
    if !report.is_valid() {
        return Err(Error::Invalid(format!("problem violates hypotheses: {report}")));
    }
    Ok(spec)
}

fn solve_at(cfg: &RunConfig, spec: &ProblemSpec, nx: usize, eps: f64) -> Result<(Solution, f64)> {
    let start = Instant::now();
    let grid = spec.grid(nx)?;
    let sol = solve(spec, &grid, &cfg.scheme(eps))?;
    if sol.margin_violated {
        log::warn!("nx={nx} eps={eps}: solution support reached the boundary margin");
    }
    Ok((sol, start.elapsed().as_secs_f64()))
}

/// One viscous run of a sweep, measured against the reference.
#[derive(Debug, Clone)]
pub struct SweepMember {
    pub eps: f64,
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub l1_qt_error: f64,
    pub l1_final_slice: f64,
    pub margin_violated: bool,
    pub budget: ErrorBudget,
    pub rvisc: RviscCheck,
    pub approx: ApproxLedger,
    pub seconds: f64,
}

impl SweepMember {
    pub fn err_over_sqrt_eps(&self) -> f64 {
        self.l1_qt_error / self.eps.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub problem: String,
    pub nx_ref: usize,
    pub dt_ref: f64,
    pub ref_margin_violated: bool,
    pub ref_seconds: f64,
    /// `‖w_ref - w_half‖` on the sweep grid, `w_half` at half the refinement.
    pub ref_self_error: f64,
    pub ref_check_pass: bool,
    pub members: Vec<SweepMember>,
    /// Present with at least three members.
    pub fit: Option<RateFit>,
}

fn measure_member(
    cfg: &RunConfig,
    spec: &ProblemSpec,
    reference: &SpaceTimeField,
    eps: f64,
    kernel: &MollifierKernel,
) -> Result<SweepMember> {
    let (sol, seconds) = solve_at(cfg, spec, cfg.nx, eps)?;
    let w = &sol.field;
    let l1_qt_error = l1_qt(w, reference)?;
    let l1_final_slice = l1_slice(w.final_slice(), reference.final_slice())?;
    let budget = measure_constants(reference, w, spec, eps, kernel);
    let params = cfg.test_fn_params(eps)?;
    let rvisc = check_rvisc_bound(w, &params, eps, &budget);
    let approx = approximation_inequality_check(reference, w, &params, &budget, rvisc.measured, cfg.c_disc)?;
    Ok(SweepMember {
        eps,
        nx: cfg.nx,
        dx: w.grid.dx(),
        dt: sol.dt,
        l1_qt_error,
        l1_final_slice,
        margin_violated: sol.margin_violated,
        budget,
        rvisc,
        approx,
        seconds,
    })
}

/// Reference solve, every viscous member, errors, constants and the fit.
/// On a member failure the manifest lists the completed members before the
/// error is returned.
pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepOutcome> {
    let spec = checked_spec(cfg)?;
    let nx_ref = cfg.nx * cfg.ref_refine;
    let kernel = MollifierKernel::standard();
    let half = cfg.nx * (cfg.ref_refine / 2);
    let (reference, half_field) = with_thread_cap(|| {
        rayon::join(
            || solve_at(cfg, &spec, nx_ref, 0.0),
            || solve_at(cfg, &spec, half, 0.0),
        )
    })?;
    let (reference, ref_seconds) = reference?;
    let (half_field, _) = half_field?;
    let base = spec.grid(cfg.nx)?;
    let ref_self_error = l1_qt(
        &half_field.field.restrict_to(&base)?,
        &reference.field.restrict_to(&base)?,
    )?;
    let results: Vec<Result<SweepMember>> = with_thread_cap(|| {
        cfg.eps_list
            .par_iter()
            .map(|&eps| measure_member(cfg, &spec, &reference.field, eps, &kernel))
            .collect()
    })?;
    let mut members = Vec::new();
    let mut failure = None;
    for (r, &eps) in results.into_iter().zip(&cfg.eps_list) {
        match r {
            Ok(m) => members.push(m),
            Err(e) => {
                log::error!("eps={eps}: {e}");
                failure.get_or_insert(e);
            }
        }
    }
    let smallest = members
        .iter()
        .map(|m| m.l1_qt_error)
        .fold(f64::INFINITY, f64::min);
    let fit = if members.len() >= 3 && failure.is_none() {
        Some(fit_rate(
            &members.iter().map(|m| (m.eps, m.l1_qt_error)).collect::<Vec<_>>(),
        )?)
    } else {
        None
    };
    let outcome = SweepOutcome {
        problem: cfg.problem_name(),
        nx_ref,
        dt_ref: reference.dt,
        ref_margin_violated: reference.margin_violated,
        ref_seconds,
        ref_self_error,
        ref_check_pass: ref_self_error < REF_CHECK_FRACTION * smallest,
        members,
        fit,
    };
    write_sweep(cfg, &outcome, failure.as_ref(), out)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

fn create(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn budget_rows(members: &[SweepMember]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for m in members {
        for (n, v, f, d) in m.budget.ledger() {
            rows.push(vec![fmt_f64(m.eps), n.into(), fmt_f64(v), f.into(), d.into()]);
        }
        let extra = [
            ("r_star", m.budget.r_star(), "sqrt(T * eps / (1 + T))", "exact minimizer of the bound"),
            ("rvisc_measured", m.rvisc.measured, "eps int_nu^tau TV(w_eps) int |omega_r'|", "measured viscous remainder"),
            ("rvisc_bound", m.rvisc.bound, "(1 + 0.05) eps T K sup_t TV(w_eps) / r", "viscous remainder bound"),
            ("approx_lhs", m.approx.lhs, "|w_eps - w|_L1(tau)", "approximation inequality, left side"),
            ("approx_rhs", m.approx.rhs, "|w_eps - w|_L1(nu) + C1 r + Rvisc + C5 T r", "approximation inequality, right side"),
            ("approx_allowance", m.approx.allowance, "c_disc * dx", "discretization allowance"),
        ];
        for (n, v, f, d) in extra {
            rows.push(vec![fmt_f64(m.eps), n.into(), fmt_f64(v), f.into(), d.into()]);
        }
    }
    rows
}

fn manifest_common(cfg: &RunConfig, rows: &mut Vec<(String, String)>) {
    rows.push(("tool_version".into(), VERSION.into()));
    for (k, v) in cfg.echo() {
        rows.push((format!("config.{k}"), v));
    }
    rows.push((
        "kernel_note".into(),
        "K is the total variation of the mollifier kernel rho".into(),
    ));
}

fn write_manifest(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `rates.csv`, `budget.csv`, `manifest.csv` and `timings.csv`.
pub fn write_sweep(
    cfg: &RunConfig,
    s: &SweepOutcome,
    failure: Option<&Error>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let rates = out.join("rates.csv");
    let rows: Vec<Vec<String>> = s
        .members
        .iter()
        .map(|m| {
            vec![
                fmt_f64(m.eps),
                m.nx.to_string(),
                s.nx_ref.to_string(),
                fmt_f64(m.dx),
                fmt_f64(m.dt),
                fmt_f64(m.l1_qt_error),
                fmt_f64(m.l1_final_slice),
                fmt_f64(m.err_over_sqrt_eps()),
            ]
        })
        .collect();
    write_rows(
        &rates,
        &["eps", "nx_eps", "nx_ref", "dx", "dt", "l1_qt_error", "l1_final_slice", "err_over_sqrt_eps"],
        &rows,
    )?;
    let budget = out.join("budget.csv");
    write_rows(
        &budget,
        &["eps", "name", "value", "formula", "reference"],
        &budget_rows(&s.members),
    )?;
    let timings = out.join("timings.csv");
    let mut trows = vec![vec!["reference".to_string(), "0".into(), format!("{:.3}", s.ref_seconds)]];
    for m in &s.members {
        trows.push(vec!["member".into(), fmt_f64(m.eps), format!("{:.3}", m.seconds)]);
    }
    write_rows(&timings, &["run", "eps", "seconds"], &trows)?;

    let mut man = Vec::new();
    manifest_common(cfg, &mut man);
    man.push(("status".into(), failure.map_or("complete".into(), |e| format!("failed: {e}"))));
    man.push(("nx_ref".into(), s.nx_ref.to_string()));
    man.push(("dt_ref".into(), fmt_f64(s.dt_ref)));
    man.push(("ref_margin_violated".into(), s.ref_margin_violated.to_string()));
    man.push(("ref_self_convergence_error".into(), fmt_f64(s.ref_self_error)));
    man.push(("ref_self_convergence_pass".into(), s.ref_check_pass.to_string()));
    man.push(("completed_members".into(), s.members.len().to_string()));
    for m in &s.members {
        let e = fmt_f64(m.eps);
        man.push((format!("member.{e}.nx"), m.nx.to_string()));
        man.push((format!("member.{e}.dt"), fmt_f64(m.dt)));
        man.push((format!("member.{e}.margin_violated"), m.margin_violated.to_string()));
        man.push((format!("member.{e}.rvisc_pass"), m.rvisc.pass.to_string()));
        man.push((format!("member.{e}.approx_pass"), m.approx.pass.to_string()));
        man.push((format!("member.{e}.c6"), fmt_f64(m.budget.c6)));
        man.push((format!("member.{e}.c7"), fmt_f64(m.budget.c7)));
    }
    match &s.fit {
        Some(f) => {
            man.push(("fit.slope".into(), fmt_f64(f.slope)));
            man.push(("fit.log_c".into(), fmt_f64(f.log_c)));
            man.push(("fit.residual".into(), fmt_f64(f.residual)));
            man.push(("fit.c_hat".into(), fmt_f64(f.c_hat)));
            man.push(("fit.c_min".into(), fmt_f64(f.c_min)));
        }
        None => man.push(("fit".into(), "none (needs at least 3 members)".into())),
    }
    let manifest = out.join("manifest.csv");
    let files = [&rates, &budget, &timings, &manifest];
    for f in files {
        man.push(("file".into(), file_name(f)));
    }
    write_manifest(&manifest, &man)?;
    Ok(files.iter().map(|p| p.to_path_buf()).collect())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Bumps over the configured window `[ν, τ]`.
pub fn configured_test_functions(cfg: &RunConfig) -> Result<Vec<SeparableTestFn>> {
    if cfg.testfn_count == 0 {
        return Err(Error::Invalid("testfn_count must be positive".into()));
    }
    let len = cfg.xmax - cfg.xmin;
    let lo = cfg.xmin + 0.1 * len;
    let spacing = 0.8 * len / cfg.testfn_count as f64;
    let alpha = 0.5 * cfg.nu.min(cfg.horizon - cfg.tau);
    let window = TimeWindow::new(cfg.nu, cfg.tau, alpha)?;
    (0..cfg.testfn_count)
        .map(|m| SeparableTestFn::new(lo + (m as f64 + 0.5) * spacing, 0.75 * spacing, window.clone()))
        .collect()
}

/// The field an audit inspects: the ingested file if configured, otherwise
/// the reference (`audit_eps = 0`, refined grid) or a viscous solve.
pub fn audit_field(cfg: &RunConfig, spec: &ProblemSpec) -> Result<SpaceTimeField> {
    if let Some(p) = &cfg.audit_field {
        return read_space_time_csv(p);
    }
    let nx = if cfg.audit_eps == 0.0 {
        cfg.nx * cfg.ref_refine
    } else {
        cfg.nx
    };
    Ok(with_thread_cap(|| solve_at(cfg, spec, nx, cfg.audit_eps))??.0.field)
}

/// Exact audit for `audit_eps = 0`, approximate otherwise.
pub fn run_entropy_audit(cfg: &RunConfig, out: &Path) -> Result<EntropyReport> {
    let spec = checked_spec(cfg)?;
    let w = audit_field(cfg, &spec)?;
    let flats = flat_regions(&spec.a)?;
    let w0 = &w.slices[0].values;
    let lo = w0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = w0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ks = default_k_grid(lo, hi, cfg.k_count, &flats);
    let phis = configured_test_functions(cfg)?;
    let refs: Vec<&dyn TestFunction> = phis.iter().map(|p| p as &dyn TestFunction).collect();
    let mode = if cfg.audit_eps == 0.0 {
        AuditMode::Exact
    } else {
        AuditMode::Approximate
    };
    let report = with_thread_cap(|| {
        audit(&w, &spec, &ks, &refs, cfg.audit_eps, mode, cfg.audit_settings())
    })??;
    fs::create_dir_all(out)?;
    let path = out.join("entropy_report.csv");
    report.write_csv(create(&path)?)?;
    let mut man = Vec::new();
    manifest_common(cfg, &mut man);
    man.push(("audit_mode".into(), format!("{mode:?}")));
    man.push(("audit_nx".into(), w.grid.nx.to_string()));
    man.push(("audit_slices".into(), w.tgrid.nt.to_string()));
    man.push(("eta0".into(), fmt_f64(report.eta0)));
    man.push(("c_audit".into(), fmt_f64(cfg.c_audit)));
    man.push(("c_eta".into(), fmt_f64(cfg.c_eta)));
    man.push(("rows".into(), report.rows.len().to_string()));
    man.push(("failures".into(), report.failures().count().to_string()));
    man.push(("file".into(), file_name(&path)));
    man.push(("file".into(), "manifest.csv".into()));
    write_manifest(&out.join("manifest.csv"), &man)?;
    Ok(report)
}

/// Budget chain for every configured `ε`, with the doubled-variable terms
/// when the grid is small enough.
#[derive(Debug, Clone)]
pub struct BudgetOutcome {
    pub members: Vec<SweepMember>,
    pub kuznetsov: Vec<(f64, KuznetsovTerms)>,
}

impl BudgetOutcome {
    pub fn all_pass(&self) -> bool {
        self.members.iter().all(|m| m.rvisc.pass && m.approx.pass)
    }
}

pub fn run_budget(cfg: &RunConfig, out: &Path) -> Result<BudgetOutcome> {
    let spec = checked_spec(cfg)?;
    let kernel = MollifierKernel::standard();
    let (reference, _) = with_thread_cap(|| solve_at(cfg, &spec, cfg.nx * cfg.ref_refine, 0.0))??;
    let members = with_thread_cap(|| {
        cfg.eps_list
            .par_iter()
            .map(|&eps| measure_member(cfg, &spec, &reference.field, eps, &kernel))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut kuznetsov = Vec::new();
    if cfg.nx <= MAX_4D_NX && cfg.output_slices <= MAX_4D_SLICES {
        let base = spec.grid(cfg.nx)?;
        let w_ref = reference.field.restrict_to(&base)?;
        for &eps in &cfg.eps_list {
            let (sol, _) = solve_at(cfg, &spec, cfg.nx, eps)?;
            let params = cfg.test_fn_params(eps)?;
            kuznetsov.push((eps, kuznetsov_terms_4d(&w_ref, &sol.field, &params)?));
        }
    }
    fs::create_dir_all(out)?;
    let budget = out.join("budget.csv");
    write_rows(
        &budget,
        &["eps", "name", "value", "formula", "reference"],
        &budget_rows(&members),
    )?;
    let mut man = Vec::new();
    manifest_common(cfg, &mut man);
    for m in &members {
        let e = fmt_f64(m.eps);
        man.push((format!("member.{e}.rvisc_pass"), m.rvisc.pass.to_string()));
        man.push((format!("member.{e}.approx_pass"), m.approx.pass.to_string()));
    }
    let mut files = vec![budget];
    if !kuznetsov.is_empty() {
        let path = out.join("kuznetsov.csv");
        let rows: Vec<Vec<String>> = kuznetsov
            .iter()
            .map(|(e, k)| vec![fmt_f64(*e), fmt_f64(k.cross), fmt_f64(k.space), fmt_f64(k.time)])
            .collect();
        write_rows(&path, &["eps", "cross", "space", "time"], &rows)?;
        files.push(path);
    } else {
        man.push(("kuznetsov".into(), "skipped (grid above the 4D cost guard)".into()));
    }
    files.push(out.join("manifest.csv"));
    for f in &files {
        man.push(("file".into(), file_name(f)));
    }
    write_manifest(&out.join("manifest.csv"), &man)?;
    Ok(BudgetOutcome { members, kuznetsov })
}

/// Solve every configured `ε` on the sweep grid and store the fields.
pub fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Vec<(f64, Solution)>> {
    let spec = checked_spec(cfg)?;
    let sols = with_thread_cap(|| {
        cfg.eps_list
            .par_iter()
            .map(|&eps| solve_at(cfg, &spec, cfg.nx, eps).map(|(s, _)| (eps, s)))
            .collect::<Result<Vec<_>>>()
    })??;
    fs::create_dir_all(out)?;
    let mut man = Vec::new();
    manifest_common(cfg, &mut man);
    for (m, (eps, sol)) in sols.iter().enumerate() {
        let name = format!("solution_{m}.csv");
        let mut f = create(&out.join(&name))?;
        write_space_time_csv(&sol.field, &mut f)?;
        f.flush()?;
        man.push((format!("solution_{m}.eps"), fmt_f64(*eps)));
        man.push((format!("solution_{m}.dt"), fmt_f64(sol.dt)));
        man.push((format!("solution_{m}.steps"), sol.steps.to_string()));
        man.push((format!("solution_{m}.margin_violated"), sol.margin_violated.to_string()));
        man.push(("file".into(), name));
    }
    man.push(("file".into(), "manifest.csv".into()));
    write_manifest(&out.join("manifest.csv"), &man)?;
    Ok(sols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn single_eps_sweep_has_no_fit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config("problem = heat\nnx = 32\neps_list = 0.001\noutput_slices = 8\n").unwrap();
        let s = run_sweep(&cfg, dir.path()).unwrap();
        assert!(s.fit.is_none());
        let text = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("eps,nx_eps,nx_ref,dx,dt,l1_qt_error,l1_final_slice,err_over_sqrt_eps"));
    }

    #[test]
    fn audit_rejects_empty_k() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config("problem = heat\nnx = 32\neps_list = 0.001\nk_count = 0\noutput_slices = 8\n").unwrap();
        assert!(run_entropy_audit(&cfg, dir.path()).is_err());
    }
}

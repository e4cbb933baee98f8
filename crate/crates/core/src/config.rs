//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::catalog;
use crate::entropy::{AuditSettings, TestFnParams};
use crate::error::{Error, Result};
use crate::problem::{BoundaryRule, ProblemSpec};
use crate::solver::SchemeConfig;

/// Where the problem data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Catalog(String),
    /// Coefficient table (`w,f,a`) and profile table (`x,v,w0`).
    Csv { coeffs: PathBuf, profile: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub xmin: f64,
    pub xmax: f64,
    pub horizon: f64,
    pub nx: usize,
    pub ref_refine: usize,
    pub eps_list: Vec<f64>,
    pub bc: BoundaryRule,
    pub cfl_safety: f64,
    pub output_slices: usize,
    pub k_count: usize,
    pub testfn_count: usize,
    pub nu: f64,
    pub tau: f64,
    pub r: Option<f64>,
    pub r0: Option<f64>,
    pub alpha0: Option<f64>,
    pub c_audit: f64,
    pub c_eta: f64,
    pub c_disc: f64,
    /// Viscosity of the audited / budgeted solution; 0 audits the reference.
    pub audit_eps: f64,
    /// Field to audit instead of a fresh solve (`t,x,w` CSV).
    pub audit_field: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

pub const DEFAULT_REF_REFINE: usize = 4;
pub const DEFAULT_OUTPUT_SLICES: usize = 64;
pub const DEFAULT_K_COUNT: usize = 20;
pub const DEFAULT_TESTFN_COUNT: usize = 5;
pub const DEFAULT_C_DISC: f64 = 1.0;

const KEYS: &[&str] = &[
    "problem",
    "coeffs_csv",
    "profile_csv",
    "xmin",
    "xmax",
    "T",
    "nx",
    "ref_refine",
    "eps_list",
    "bc",
    "cfl_safety",
    "output_slices",
    "k_count",
    "testfn_count",
    "nu",
    "tau",
    "r",
    "r0",
    "alpha0",
    "c_audit",
    "c_eta",
    "c_disc",
    "audit_eps",
    "audit_field",
    "output_dir",
    "seed",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.map.get(key).map(|e| e.0).unwrap_or(0)
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::Config {
                line: *line,
                msg: format!("malformed value for {key}: '{v}'"),
            }),
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

/// Parse and validate a configuration. Unknown keys, malformed values and
/// inadmissible test-function parameters are reported with their line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got '{body}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(err(line, format!("unknown key '{k}'")));
        }
        if map.insert(k.to_string(), (line, v.to_string())).is_some() {
            return Err(err(line, format!("duplicate key '{k}'")));
        }
    }
    let e = Entries { map };

    let problem = match (e.raw("problem"), e.raw("coeffs_csv"), e.raw("profile_csv")) {
        (Some((line, name)), None, None) => {
            if !catalog::CATALOG.contains(&name.as_str()) {
                return Err(err(
                    *line,
                    format!("unknown problem '{name}' (catalog: {})", catalog::CATALOG.join(", ")),
                ));
            }
            ProblemSource::Catalog(name.clone())
        }
        (None, Some((_, c)), Some((_, p))) => ProblemSource::Csv {
            coeffs: c.into(),
            profile: p.into(),
        },
        (Some((line, _)), _, _) => {
            return Err(err(*line, "give either problem or coeffs_csv/profile_csv, not both"))
        }
        _ => return Err(err(0, "missing problem (or coeffs_csv and profile_csv)")),
    };
    let base = match &problem {
        ProblemSource::Catalog(n) => Some(catalog::problem(n)?),
        ProblemSource::Csv { .. } => None,
    };
    let need = |key: &str, dflt: Option<f64>| -> Result<f64> {
        e.parse::<f64>(key)?
            .or(dflt)
            .ok_or_else(|| err(0, format!("missing {key}")))
    };
    let xmin = need("xmin", base.as_ref().map(|b| b.xmin))?;
    let xmax = need("xmax", base.as_ref().map(|b| b.xmax))?;
    let horizon = need("T", base.as_ref().map(|b| b.horizon))?;
    if !(xmin < xmax) {
        return Err(err(e.line("xmax"), "need xmin < xmax"));
    }
    if !(horizon > 0.0) {
        return Err(err(e.line("T"), "T must be positive"));
    }
    let nx: usize = e.parse("nx")?.ok_or_else(|| err(0, "missing nx"))?;
    if nx < 4 {
        return Err(err(e.line("nx"), "nx must be at least 4"));
    }
    let ref_refine = e.parse("ref_refine")?.unwrap_or(DEFAULT_REF_REFINE);
    if ref_refine < 4 {
        return Err(err(e.line("ref_refine"), "ref_refine must be at least 4"));
    }

    let eps_list = match e.raw("eps_list") {
        None => return Err(err(0, "missing eps_list")),
        Some((line, v)) => {
            let list = v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| err(*line, format!("malformed eps value '{}'", s.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            if list.is_empty() {
                return Err(err(*line, "eps_list is empty"));
            }
            if list.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(err(*line, "eps must be positive"));
            }
            if list.windows(2).any(|p| p[1] >= p[0]) {
                return Err(err(*line, "eps_list must be strictly descending"));
            }
            list
        }
    };

    let bc = match e.raw("bc") {
        None => base.as_ref().map(|b| b.bc).unwrap_or(BoundaryRule::Outflow),
        Some((line, v)) => BoundaryRule::parse(v)
            .ok_or_else(|| err(*line, format!("bc must be periodic or outflow, got '{v}'")))?,
    };
    let cfl_safety = e.parse("cfl_safety")?.unwrap_or(SchemeConfig::DEFAULT_CFL);
    if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        return Err(err(e.line("cfl_safety"), "cfl_safety must lie in (0, 1]"));
    }
    let output_slices = e.parse("output_slices")?.unwrap_or(DEFAULT_OUTPUT_SLICES);
    if output_slices == 0 || output_slices > SchemeConfig::MAX_SLICES {
        return Err(err(
            e.line("output_slices"),
            format!("output_slices must lie in 1..={}", SchemeConfig::MAX_SLICES),
        ));
    }
    let cfg = RunConfig {
        problem,
        xmin,
        xmax,
        horizon,
        nx,
        ref_refine,
        eps_list,
        bc,
        cfl_safety,
        output_slices,
        k_count: e.parse("k_count")?.unwrap_or(DEFAULT_K_COUNT),
        testfn_count: e.parse("testfn_count")?.unwrap_or(DEFAULT_TESTFN_COUNT),
        nu: e.parse("nu")?.unwrap_or(0.1 * horizon),
        tau: e.parse("tau")?.unwrap_or(0.9 * horizon),
        r: e.parse("r")?,
        r0: e.parse("r0")?,
        alpha0: e.parse("alpha0")?,
        c_audit: e.parse("c_audit")?.unwrap_or(AuditSettings::DEFAULT_C_AUDIT),
        c_eta: e.parse("c_eta")?.unwrap_or(AuditSettings::DEFAULT_C_ETA),
        c_disc: e.parse("c_disc")?.unwrap_or(DEFAULT_C_DISC),
        audit_eps: e.parse("audit_eps")?.unwrap_or(0.0),
        audit_field: e.raw("audit_field").map(|(_, v)| PathBuf::from(v)),
        output_dir: e
            .raw("output_dir")
            .map(|(_, v)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("out")),
        seed: e.parse("seed")?.unwrap_or(0),
    };
    if !(cfg.audit_eps >= 0.0) {
        return Err(err(e.line("audit_eps"), "audit_eps must be nonnegative"));
    }
    if !(cfg.nu < cfg.tau) {
        return Err(err(e.line("tau").max(e.line("nu")), "need nu < tau"));
    }
    for &eps in &cfg.eps_list {
        if let Err(Error::Invalid(msg)) = cfg.test_fn_params(eps) {
            let line = [e.line("tau"), e.line("nu"), e.line("r0"), e.line("alpha0"), e.line("eps_list")]
                .into_iter()
                .find(|&l| l > 0)
                .unwrap_or(0);
            return Err(err(line, format!("eps={eps}: {msg}")));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn spec(&self) -> Result<ProblemSpec> {
        let s = match &self.problem {
            ProblemSource::Catalog(n) => catalog::problem(n)?,
            ProblemSource::Csv { coeffs, profile } => {
                ProblemSpec::from_csv("custom", coeffs, profile, self.horizon, self.bc)?
            }
        };
        let mut s = s.with_horizon(self.horizon).with_domain(self.xmin, self.xmax);
        s.bc = self.bc;
        Ok(s)
    }

    pub fn problem_name(&self) -> String {
        match &self.problem {
            ProblemSource::Catalog(n) => n.clone(),
            ProblemSource::Csv { .. } => "custom".into(),
        }
    }

    /// Test-function parameters for viscosity `eps`: `r = √(Tε)`,
    /// `r0 = r/4`, `α0 = min(ν - r0, T - τ - r0)/2` unless overridden.
    pub fn test_fn_params(&self, eps: f64) -> Result<TestFnParams> {
        let t = self.horizon;
        let r = self.r.unwrap_or((t * eps).sqrt());
        let r0 = self.r0.unwrap_or(0.25 * r);
        let alpha0 = self
            .alpha0
            .unwrap_or(0.5 * (self.nu - r0).min(t - self.tau - r0));
        TestFnParams::new(r, r0, alpha0, self.nu, self.tau, t)
    }

    pub fn scheme(&self, eps: f64) -> SchemeConfig {
        SchemeConfig::new(eps, self.bc)
            .with_cfl(self.cfl_safety)
            .with_slices(self.output_slices)
    }

    pub fn audit_settings(&self) -> AuditSettings {
        AuditSettings {
            c_audit: self.c_audit,
            c_eta: self.c_eta,
        }
    }

    /// `(key, value)` pairs reproducing this configuration.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, s: String| v.push((k.to_string(), s));
        match &self.problem {
            ProblemSource::Catalog(n) => put("problem", n.clone()),
            ProblemSource::Csv { coeffs, profile } => {
                put("coeffs_csv", coeffs.display().to_string());
                put("profile_csv", profile.display().to_string());
            }
        }
        put("xmin", self.xmin.to_string());
        put("xmax", self.xmax.to_string());
        put("T", self.horizon.to_string());
        put("nx", self.nx.to_string());
        put("ref_refine", self.ref_refine.to_string());
        put(
            "eps_list",
            self.eps_list
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put("bc", self.bc.name().to_string());
        put("cfl_safety", self.cfl_safety.to_string());
        put("output_slices", self.output_slices.to_string());
        put("k_count", self.k_count.to_string());
        put("testfn_count", self.testfn_count.to_string());
        put("nu", self.nu.to_string());
        put("tau", self.tau.to_string());
        for (k, o) in [("r", self.r), ("r0", self.r0), ("alpha0", self.alpha0)] {
            if let Some(x) = o {
                put(k, x.to_string());
            }
        }
        put("c_audit", self.c_audit.to_string());
        put("c_eta", self.c_eta.to_string());
        put("c_disc", self.c_disc.to_string());
        put("audit_eps", self.audit_eps.to_string());
        if let Some(p) = &self.audit_field {
            put("audit_field", p.display().to_string());
        }
        put("output_dir", self.output_dir.display().to_string());
        put("seed", self.seed.to_string());
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "problem = burgers_degenerate\nnx = 400\nT = 0.5\neps_list = 0.0625, 0.015625\n";

    #[test]
    fn minimal_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.ref_refine, 4);
        assert_eq!(c.cfl_safety, 0.45);
        assert_eq!(c.k_count, 20);
        assert_eq!(c.testfn_count, 5);
        assert_eq!(c.bc, BoundaryRule::Outflow);
        assert_eq!((c.xmin, c.xmax), (-2.0, 2.0));
        assert!((c.nu - 0.05).abs() < 1e-15 && (c.tau - 0.45).abs() < 1e-15);
        let p = c.test_fn_params(0.0625).unwrap();
        assert!((p.r - (0.5f64 * 0.0625).sqrt()).abs() < 1e-15);
        assert_eq!(p.r0, 0.25 * p.r);
    }

    #[test]
    fn zero_eps_rejected() {
        let e = parse_config("problem = heat\nnx = 100\neps_list = 0.1, 0\n").unwrap_err();
        assert!(e.to_string().contains("eps must be positive"));
        assert!(e.to_string().contains("line 3"));
    }

    #[test]
    fn inadmissible_tau() {
        let e = parse_config(&format!("{MINIMAL}tau = 0.49\n")).unwrap_err();
        let s = e.to_string();
        assert!(s.contains("admissibility") && s.contains("line 5"), "{s}");
    }

    #[test]
    fn unknown_and_malformed() {
        let e = parse_config("problem = heat\nnx = 100\neps_list = 0.1\nfoo = 1\n").unwrap_err();
        assert!(e.to_string().contains("unknown key 'foo'") && e.to_string().contains("line 4"));
        let e = parse_config("problem = heat\nnx = many\neps_list = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
        let e = parse_config("# comment only\nproblem = heat # inline\nnx = 64\neps_list = 0.001\nref_refine = 2\n")
            .unwrap_err();
        assert!(e.to_string().contains("ref_refine"));
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        let text: String = c.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}

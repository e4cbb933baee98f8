//! Conservative explicit monotone scheme for
//! `∂t w + (V(x) f(w))_x = (A(w) + ε w)_xx`.
//!
//! Convection uses the Engquist–Osher splitting `f = f⁺ + f⁻` of the
//! piecewise-linear flux, upwinded on the sign of `V` at each interface;
//! diffusion is the standard three-point stencil applied to `A^ε(w)`.
//! With `ε = 0` on a fine grid the same scheme produces the reference
//! entropy solution.

use log::debug;

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid1D, SpaceTimeField, TimeGrid};
use crate::problem::{BoundaryRule, DiffusionFn, ProblemSpec, ScalarFn1D, VelocityField1D};

/// Cells within this distance of an outflow boundary must stay at rest.
pub const SUPPORT_MARGIN_CELLS: usize = 5;
/// `|w| <= SUPPORT_THRESHOLD * sup|w0|` counts as at rest.
pub const SUPPORT_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl_safety: f64,
    pub eps: f64,
    pub bc: BoundaryRule,
    /// Number of stored time intervals; the step count is rounded up to a
    /// multiple of this.
    pub output_slices: usize,
}

impl SchemeConfig {
    pub const DEFAULT_CFL: f64 = 0.45;
    pub const DEFAULT_SLICES: usize = 256;
    pub const MAX_SLICES: usize = 512;

    pub fn new(eps: f64, bc: BoundaryRule) -> Self {
        Self {
            cfl_safety: Self::DEFAULT_CFL,
            eps,
            bc,
            output_slices: Self::DEFAULT_SLICES,
        }
    }

    pub fn for_problem(spec: &ProblemSpec, eps: f64) -> Self {
        Self::new(eps, spec.bc)
    }

    pub fn with_slices(mut self, n: usize) -> Self {
        self.output_slices = n;
        self
    }

    pub fn with_cfl(mut self, c: f64) -> Self {
        self.cfl_safety = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Invalid(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Invalid(format!("eps must be >= 0, got {}", self.eps)));
        }
        if self.output_slices == 0 || self.output_slices > Self::MAX_SLICES {
            return Err(Error::Invalid(format!(
                "output_slices must lie in 1..={}, got {}",
                Self::MAX_SLICES,
                self.output_slices
            )));
        }
        Ok(())
    }
}

/// Engquist–Osher split of a piecewise-linear flux.
#[derive(Debug, Clone)]
pub struct EoSplit {
    pub plus: ScalarFn1D,
    pub minus: ScalarFn1D,
}

impl EoSplit {
    pub fn new(f: &ScalarFn1D) -> Self {
        Self {
            plus: f.positive_part(),
            minus: f.negative_part(),
        }
    }

    /// `f⁺(a) + f⁻(b)` without range checks.
    pub fn flux(&self, a: f64, b: f64) -> f64 {
        self.plus.eval(a) + self.minus.eval(b)
    }
}

/// Engquist–Osher two-point flux `f⁺(a) + f⁻(b)`.
pub fn eo_flux(f: &ScalarFn1D, a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = f.range();
    for v in [a, b] {
        if !f.contains(v) {
            return Err(Error::OutOfRange { value: v, lo, hi });
        }
    }
    Ok(EoSplit::new(f).flux(a, b))
}

/// Largest monotone time step (times the safety factor).
///
/// Convection clause `dx / (‖V‖∞ Lip f + |div V|∞ Lip f dx)`, diffusion
/// clause `dx² / (2 (Lip A + ε))`; a clause with a vanishing denominator
/// is dropped, and with both dropped the step is the whole horizon.
pub fn stable_dt(spec: &ProblemSpec, grid: &Grid1D, cfg: &SchemeConfig) -> f64 {
    let v = spec.velocity_field(grid);
    stable_dt_with(spec, &v, grid, cfg)
}

fn stable_dt_with(spec: &ProblemSpec, v: &VelocityField1D, grid: &Grid1D, cfg: &SchemeConfig) -> f64 {
    let dx = grid.dx();
    let lip_f = spec.f.lipschitz();
    let conv = v.sup * lip_f + v.div_sup() * lip_f * dx;
    let diff = spec.a.lipschitz() + cfg.eps;
    let mut dt = f64::INFINITY;
    if conv > 0.0 {
        dt = dt.min(dx / conv);
    }
    if diff > 0.0 {
        dt = dt.min(dx * dx / (2.0 * diff));
    }
    if dt.is_finite() {
        cfg.cfl_safety * dt
    } else {
        spec.horizon
    }
}

/// Precomputed operator for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid1D,
    bc: BoundaryRule,
    split: EoSplit,
    diffusion: DiffusionFn,
    velocity: VelocityField1D,
    // scratch
    fp: Vec<f64>,
    fm: Vec<f64>,
    ad: Vec<f64>,
    flux: Vec<f64>,
}

impl Stepper {
    pub fn new(spec: &ProblemSpec, grid: &Grid1D, cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let n = grid.nx + 2;
        Ok(Self {
            grid: *grid,
            bc: cfg.bc,
            split: EoSplit::new(&spec.f),
            diffusion: spec.diffusion(cfg.eps)?,
            velocity: VelocityField1D::sample(&spec.velocity, grid, cfg.bc),
            fp: vec![0.0; n],
            fm: vec![0.0; n],
            ad: vec![0.0; n],
            flux: vec![0.0; grid.nx + 1],
        })
    }

    pub fn velocity(&self) -> &VelocityField1D {
        &self.velocity
    }

    /// Advance `w` in place by `dt`.
    pub fn advance(&mut self, w: &mut [f64], dt: f64) {
        let nx = self.grid.nx;
        let dx = self.grid.dx();
        let (left, right) = match self.bc {
            BoundaryRule::Periodic => (w[nx - 1], w[0]),
            BoundaryRule::Outflow => (w[0], w[nx - 1]),
        };
        // index m of the scratch arrays holds cell m-1; 0 and nx+1 are ghosts
        for m in 0..nx + 2 {
            let u = if m == 0 {
                left
            } else if m == nx + 1 {
                right
            } else {
                w[m - 1]
            };
            self.fp[m] = self.split.plus.eval(u);
            self.fm[m] = self.split.minus.eval(u);
            self.ad[m] = self.diffusion.eval(u);
        }
        // interface k sits between scratch cells k and k+1
        for k in 0..=nx {
            let v = self.velocity.node_values[k];
            self.flux[k] = if v >= 0.0 {
                v * (self.fp[k] + self.fm[k + 1])
            } else {
                v * (self.fm[k] + self.fp[k + 1])
            };
        }
        if self.bc == BoundaryRule::Periodic {
            self.flux[nx] = self.flux[0];
        }
        let lambda = dt / dx;
        let mu = dt / (dx * dx);
        for i in 0..nx {
            let m = i + 1;
            let conv = self.flux[i + 1] - self.flux[i];
            let diff = (self.ad[m + 1] - self.ad[m]) - (self.ad[m] - self.ad[m - 1]);
            w[i] = w[i] - lambda * conv + mu * diff;
        }
    }
}

/// One explicit step.
pub fn step(w: &Field, spec: &ProblemSpec, cfg: &SchemeConfig, dt: f64) -> Result<Field> {
    let mut stepper = Stepper::new(spec, &w.grid, cfg)?;
    let mut next = w.values.clone();
    stepper.advance(&mut next, dt);
    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::Unstable {
            step: 1,
            detail: format!("non-finite value in cell {i}"),
        });
    }
    Field::new(w.grid, next)
}

/// Result of a full solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: SpaceTimeField,
    /// Time step actually used.
    pub dt: f64,
    pub steps: usize,
    /// Set when, under outflow, the solution left the rest state within
    /// `SUPPORT_MARGIN_CELLS` of the boundary.
    pub margin_violated: bool,
}

/// Solve on `[0, T]`, storing `cfg.output_slices + 1` uniformly spaced
/// slices.
pub fn solve(spec: &ProblemSpec, grid: &Grid1D, cfg: &SchemeConfig) -> Result<Solution> {
    let w0 = spec.initial_field(grid)?;
    solve_from(spec, &w0, cfg)
}

/// Solve from explicit initial values.
pub fn solve_from(spec: &ProblemSpec, w0: &Field, cfg: &SchemeConfig) -> Result<Solution> {
    let grid = w0.grid;
    let mut stepper = Stepper::new(spec, &grid, cfg)?;
    let dt_max = stable_dt_with(spec, &stepper.velocity, &grid, cfg);
    let n_out = cfg.output_slices;
    let nt_min = (spec.horizon / dt_max).ceil().max(1.0) as usize;
    let steps = nt_min.div_ceil(n_out) * n_out;
    let dt = spec.horizon / steps as f64;
    let stride = steps / n_out;
    debug!(
        "solve {}: nx={} eps={} steps={} dt={:e}",
        spec.name, grid.nx, cfg.eps, steps, dt
    );

    let rest = SUPPORT_THRESHOLD * w0.sup_norm();
    let check_margin = cfg.bc == BoundaryRule::Outflow;
    let near_boundary = |w: &[f64]| {
        let n = w.len();
        let m = SUPPORT_MARGIN_CELLS.min(n);
        w[..m].iter().chain(&w[n - m..]).any(|v| v.abs() > rest)
    };

    let mut w = w0.values.clone();
    let mut margin_violated = check_margin && near_boundary(&w);
    let mut slices = Vec::with_capacity(n_out + 1);
    slices.push(w0.clone());
    for n in 1..=steps {
        stepper.advance(&mut w, dt);
        if n % stride == 0 || n == steps {
            if let Some(i) = w.iter().position(|v| !v.is_finite()) {
                return Err(Error::Unstable {
                    step: n,
                    detail: format!("non-finite value in cell {i}"),
                });
            }
            if check_margin && !margin_violated {
                margin_violated = near_boundary(&w);
            }
            slices.push(Field {
                grid,
                values: w.clone(),
            });
        }
    }
    let field = SpaceTimeField::new(grid, TimeGrid::new(spec.horizon, n_out)?, slices)?;
    Ok(Solution {
        field,
        dt,
        steps,
        margin_violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{InitialData, VelocityProfile};

    fn lin(lo: f64, hi: f64, slope: f64) -> ScalarFn1D {
        ScalarFn1D::new(vec![lo, hi], vec![slope * lo, slope * hi]).unwrap()
    }

    fn zero() -> ScalarFn1D {
        ScalarFn1D::new(vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap()
    }

    fn burgers() -> ScalarFn1D {
        ScalarFn1D::sample(-1.0, 1.0, 200, |w| 0.5 * w * w).unwrap()
    }

    fn spec(f: ScalarFn1D, a: ScalarFn1D, bc: BoundaryRule) -> ProblemSpec {
        ProblemSpec {
            name: "t".into(),
            f,
            a,
            velocity: VelocityProfile::Constant(1.0),
            w0: InitialData::boxed(-0.5, 0.5, 1.0),
            xmin: -1.0,
            xmax: 1.0,
            horizon: 1.0,
            bc,
        }
    }

    #[test]
    fn eo_flux_examples() {
        let f = burgers();
        assert!((eo_flux(&f, 0.7, 0.7).unwrap() - 0.245).abs() < 1e-12);
        assert_eq!(eo_flux(&f, 0.0, 0.0).unwrap(), 0.0);
        assert!((eo_flux(&f, 1.0, -1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(eo_flux(&f, 1.5, 0.0).is_err());
    }

    #[test]
    fn stable_dt_clauses() {
        let g = Grid1D::new(-1.0, 1.0, 200).unwrap();
        let adv = spec(lin(-1.0, 1.0, 1.0), zero(), BoundaryRule::Periodic);
        let cfg = SchemeConfig::new(0.0, BoundaryRule::Periodic);
        assert!((stable_dt(&adv, &g, &cfg) - 0.0045).abs() < 1e-15);
        let heat = spec(zero(), lin(-1.0, 1.0, 1.0), BoundaryRule::Outflow);
        assert!((stable_dt(&heat, &g, &cfg) - 2.25e-5).abs() < 1e-18);
    }

    #[test]
    fn stable_dt_takes_the_smaller_clause() {
        // convection dx/1 vs diffusion dx²/(2(1.5 + 1/64)) on [-1, 1]
        let a = ScalarFn1D::sample(-1.0, 1.0, 200, |w| (w - 0.25).max(0.0).powi(2)).unwrap();
        let s = spec(burgers(), a, BoundaryRule::Outflow);
        let g = Grid1D::new(-2.0, 2.0, 400).unwrap();
        let cfg = SchemeConfig::new(1.0 / 64.0, BoundaryRule::Outflow);
        let dx: f64 = 0.01;
        let lip_f = 1.0 - 0.005; // slope of the last chord of w²/2
        let lip_a = 2.0 * 0.75 - 0.01; // last chord of (w - 1/4)²
        let conv = dx / lip_f;
        let diff = dx * dx / (2.0 * (lip_a + 1.0 / 64.0));
        let expect = 0.45 * conv.min(diff);
        assert!((stable_dt(&s, &g, &cfg) - expect).abs() < 1e-12 * expect);
        assert!(diff < conv);
    }

    #[test]
    fn constants_are_fixed_points() {
        let s = spec(burgers(), lin(-1.0, 1.0, 1.0), BoundaryRule::Periodic);
        let g = Grid1D::new(-1.0, 1.0, 32).unwrap();
        let cfg = SchemeConfig::new(0.1, BoundaryRule::Periodic);
        let w = Field::constant(g, 0.37);
        let dt = stable_dt(&s, &g, &cfg);
        assert_eq!(step(&w, &s, &cfg, dt).unwrap(), w);
    }

    #[test]
    fn unit_cfl_advection_shifts_one_cell() {
        let s = spec(lin(-1.0, 1.0, 1.0), zero(), BoundaryRule::Periodic);
        let g = Grid1D::new(-1.0, 1.0, 20).unwrap();
        let cfg = SchemeConfig::new(0.0, BoundaryRule::Periodic).with_cfl(1.0);
        let w = Field::from_fn(g, |x| if x < 0.0 { 1.0 } else { 0.0 }).unwrap();
        let next = step(&w, &s, &cfg, g.dx()).unwrap();
        for i in 0..20 {
            assert_eq!(next.values[i], w.values[(i + 19) % 20]);
        }
    }

    #[test]
    fn heat_step_spreads_spike() {
        let s = spec(zero(), lin(-1.0, 1.0, 1.0), BoundaryRule::Outflow);
        let g = Grid1D::new(-1.0, 1.0, 20).unwrap();
        let cfg = SchemeConfig::new(0.0, BoundaryRule::Outflow);
        let mut w = Field::constant(g, 0.0);
        w.values[10] = 1.0;
        let dt = stable_dt(&s, &g, &cfg);
        let lam = dt / (g.dx() * g.dx());
        let next = step(&w, &s, &cfg, dt).unwrap();
        assert!((next.values[9] - lam).abs() < 1e-15);
        assert!((next.values[10] - (1.0 - 2.0 * lam)).abs() < 1e-15);
        assert!((next.values[11] - lam).abs() < 1e-15);
        assert_eq!(next.values[8], 0.0);
    }

    #[test]
    fn instability_is_reported() {
        let s = spec(zero(), lin(-1.0, 1.0, 1.0), BoundaryRule::Outflow);
        let g = Grid1D::new(-1.0, 1.0, 20).unwrap();
        let cfg = SchemeConfig::new(0.0, BoundaryRule::Outflow);
        let w = Field::from_fn(g, |x| if x < 0.0 { 1.0 } else { -1.0 }).unwrap();
        match step(&w, &s, &cfg, 1e308) {
            Err(Error::Unstable { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn solve_stores_uniform_slices() {
        let s = spec(lin(-1.0, 1.0, 1.0), zero(), BoundaryRule::Periodic);
        let g = Grid1D::new(-1.0, 1.0, 50).unwrap();
        let cfg = SchemeConfig::new(0.0, BoundaryRule::Periodic).with_slices(16);
        let sol = solve(&s, &g, &cfg).unwrap();
        assert_eq!(sol.field.slices.len(), 17);
        assert_eq!(sol.steps % 16, 0);
        assert!((sol.dt * sol.steps as f64 - 1.0).abs() < 1e-12);
        assert!(!sol.margin_violated);
    }
}

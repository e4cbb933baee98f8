//! Kružkov entropy functionals, mollifiers and the doubled test function.

use std::fmt;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::SpaceTimeField;
use crate::problem::{flat_regions, BoundaryRule, FlatRegions, ProblemSpec, VelocityField1D};

pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sgn(τ)` for `|τ| > η`, `τ/η` otherwise.
pub fn sgn_eta(tau: f64, eta: f64) -> f64 {
    if tau.abs() > eta {
        sgn(tau)
    } else {
        tau / eta
    }
}

/// Piecewise-linear approximation of the sign function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignApprox {
    eta: f64,
}

impl SignApprox {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Invalid(format!("eta must be positive, got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eval(&self, tau: f64) -> f64 {
        sgn_eta(tau, self.eta)
    }

    pub fn derivative(&self, tau: f64) -> f64 {
        if tau.abs() <= self.eta {
            1.0 / self.eta
        } else {
            0.0
        }
    }
}

/// Intervals of the table on `[0, 1]`; the kernel is even, so this is
/// 2048 intervals across its full support.
const HALF_INTERVALS: usize = 1024;

/// Normalized bump `c·exp(1/(σ²-1))` on `[-1, 1]`, stored as a cubic Hermite
/// table of values and slopes.
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// `∫_0^{σ_m} ρ` at each node.
    partial: Vec<f64>,
    big_k: f64,
}

fn bump(s: f64) -> (f64, f64) {
    let q = s * s - 1.0;
    if q >= 0.0 {
        return (0.0, 0.0);
    }
    let b = (1.0 / q).exp();
    (b, b * (-2.0 * s) / (q * q))
}

impl MollifierKernel {
    pub fn new() -> Self {
        let n = HALF_INTERVALS;
        let h = 1.0 / n as f64;
        let (mut values, mut slopes): (Vec<f64>, Vec<f64>) =
            (0..=n).map(|m| bump(m as f64 * h)).unzip();
        let mut k = Self {
            h,
            values: values.clone(),
            slopes: slopes.clone(),
            partial: vec![0.0; n + 1],
            big_k: 0.0,
        };
        let mut half = 0.0;
        for m in 0..n {
            half += k.cell_integral(m, 1.0);
        }
        let z = 2.0 * half;
        for v in values.iter_mut().chain(slopes.iter_mut()) {
            *v /= z;
        }
        k.values = values;
        k.slopes = slopes;
        for m in 0..n {
            k.partial[m + 1] = k.partial[m] + k.cell_integral(m, 1.0);
        }
        // |ρ'| by 3-point Gauss per cell; ρ' is a quadratic on each cell.
        let g = [
            (0.5 - 0.5 * (0.6f64).sqrt(), 5.0 / 18.0),
            (0.5, 8.0 / 18.0),
            (0.5 + 0.5 * (0.6f64).sqrt(), 5.0 / 18.0),
        ];
        let mut big_k = 0.0;
        for m in 0..n {
            for (t, wg) in g {
                big_k += wg * h * k.cell_derivative(m, t).abs();
            }
        }
        k.big_k = 2.0 * big_k;
        k
    }

    /// Process-wide shared kernel.
    pub fn standard() -> Arc<MollifierKernel> {
        static K: OnceLock<Arc<MollifierKernel>> = OnceLock::new();
        K.get_or_init(|| Arc::new(MollifierKernel::new())).clone()
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let m = ((u / self.h) as usize).min(HALF_INTERVALS - 1);
        (m, u / self.h - m as f64)
    }

    fn cell_value(&self, m: usize, t: f64) -> f64 {
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[m]
            + (t3 - 2.0 * t2 + t) * self.h * self.slopes[m]
            + (-2.0 * t3 + 3.0 * t2) * self.values[m + 1]
            + (t3 - t2) * self.h * self.slopes[m + 1]
    }

    fn cell_derivative(&self, m: usize, t: f64) -> f64 {
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * (self.values[m] - self.values[m + 1]) / self.h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[m]
            + (3.0 * t2 - 2.0 * t) * self.slopes[m + 1]
    }

    fn cell_integral(&self, m: usize, t: f64) -> f64 {
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        self.h
            * ((0.5 * t4 - t3 + t) * self.values[m]
                + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * self.h * self.slopes[m]
                + (-0.5 * t4 + t3) * self.values[m + 1]
                + (0.25 * t4 - t3 / 3.0) * self.h * self.slopes[m + 1])
    }

    /// `ρ(σ)`.
    pub fn eval(&self, s: f64) -> f64 {
        let u = s.abs();
        if u >= 1.0 {
            return 0.0;
        }
        let (m, t) = self.locate(u);
        self.cell_value(m, t).max(0.0)
    }

    /// `ρ'(σ)`.
    pub fn derivative(&self, s: f64) -> f64 {
        let u = s.abs();
        if u >= 1.0 {
            return 0.0;
        }
        let (m, t) = self.locate(u);
        sgn(s) * self.cell_derivative(m, t)
    }

    /// Running integral `∫_{-1}^σ ρ`.
    pub fn cumulative(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let (m, t) = self.locate(s.abs());
        let c = self.partial[m] + self.cell_integral(m, t);
        let v = if s >= 0.0 { 0.5 + c } else { 0.5 - c };
        v.clamp(0.0, 1.0)
    }

    /// `∫ ρ` by exact integration of the table.
    pub fn mass(&self) -> f64 {
        2.0 * self.partial[HALF_INTERVALS]
    }

    /// `K = ∫ |ρ'|`.
    pub fn big_k(&self) -> f64 {
        self.big_k
    }

    /// `ω_r(z) = ρ(z/r)/r`.
    pub fn scaled(&self, r: f64, z: f64) -> f64 {
        self.eval(z / r) / r
    }

    pub fn scaled_derivative(&self, r: f64, z: f64) -> f64 {
        self.derivative(z / r) / (r * r)
    }

    /// `H_r(z) = ∫_{-∞}^z ω_r`.
    pub fn scaled_cumulative(&self, r: f64, z: f64) -> f64 {
        self.cumulative(z / r)
    }
}

impl Default for MollifierKernel {
    fn default() -> Self {
        Self::new()
    }
}

/// Smoothed indicator `ψ(t) = H_α(t-ν) - H_α(t-τ)` of `[ν, τ]`.
#[derive(Debug, Clone)]
pub struct TimeWindow {
    pub nu: f64,
    pub tau: f64,
    pub alpha0: f64,
    pub kernel: Arc<MollifierKernel>,
}

impl TimeWindow {
    pub fn new(nu: f64, tau: f64, alpha0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && nu < tau) {
            return Err(Error::Invalid(format!(
                "window needs alpha0 > 0 and nu < tau (nu={nu}, tau={tau}, alpha0={alpha0})"
            )));
        }
        Ok(Self {
            nu,
            tau,
            alpha0,
            kernel: MollifierKernel::standard(),
        })
    }

    pub fn psi(&self, t: f64) -> f64 {
        let k = &self.kernel;
        k.scaled_cumulative(self.alpha0, t - self.nu) - k.scaled_cumulative(self.alpha0, t - self.tau)
    }

    pub fn psi_dt(&self, t: f64) -> f64 {
        let k = &self.kernel;
        k.scaled(self.alpha0, t - self.nu) - k.scaled(self.alpha0, t - self.tau)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nu - self.alpha0, self.tau + self.alpha0)
    }
}

/// Parameters of the doubled test function
/// `φ(x,t,y,s) = ψ_α0(t) ω_r(x-y) ρ_r0(t-s)`.
#[derive(Debug, Clone)]
pub struct TestFnParams {
    pub r: f64,
    pub r0: f64,
    pub alpha0: f64,
    pub nu: f64,
    pub tau: f64,
    pub horizon: f64,
    pub kernel: Arc<MollifierKernel>,
}

impl TestFnParams {
    /// Checks `0 < r0 < min(ν, T-τ)` and `0 < α0 < min(ν-r0, T-τ-r0)`.
    pub fn new(r: f64, r0: f64, alpha0: f64, nu: f64, tau: f64, horizon: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Invalid(format!("r must be positive, got {r}")));
        }
        if !(0.0 < nu && nu < tau && tau < horizon) {
            return Err(Error::Invalid(format!(
                "need 0 < nu < tau < T (nu={nu}, tau={tau}, T={horizon})"
            )));
        }
        let r0_max = nu.min(horizon - tau);
        if !(r0 > 0.0 && r0 < r0_max) {
            return Err(Error::Invalid(format!(
                "admissibility violated: need 0 < r0 < min(nu, T - tau) = {r0_max}, got r0={r0}"
            )));
        }
        let a_max = (nu - r0).min(horizon - tau - r0);
        if !(alpha0 > 0.0 && alpha0 < a_max) {
            return Err(Error::Invalid(format!(
                "admissibility violated: need 0 < alpha0 < min(nu - r0, T - tau - r0) = {a_max}, got alpha0={alpha0}"
            )));
        }
        Ok(Self {
            r,
            r0,
            alpha0,
            nu,
            tau,
            horizon,
            kernel: MollifierKernel::standard(),
        })
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow {
            nu: self.nu,
            tau: self.tau,
            alpha0: self.alpha0,
            kernel: self.kernel.clone(),
        }
    }

    pub fn psi(&self, t: f64) -> f64 {
        self.window().psi(t)
    }

    pub fn psi_dt(&self, t: f64) -> f64 {
        self.window().psi_dt(t)
    }

    pub fn phi(&self, x: f64, t: f64, y: f64, s: f64) -> f64 {
        let k = &self.kernel;
        self.psi(t) * k.scaled(self.r, x - y) * k.scaled(self.r0, t - s)
    }

    pub fn phi_x(&self, x: f64, t: f64, y: f64, s: f64) -> f64 {
        let k = &self.kernel;
        self.psi(t) * k.scaled_derivative(self.r, x - y) * k.scaled(self.r0, t - s)
    }

    pub fn phi_y(&self, x: f64, t: f64, y: f64, s: f64) -> f64 {
        -self.phi_x(x, t, y, s)
    }

    pub fn phi_t(&self, x: f64, t: f64, y: f64, s: f64) -> f64 {
        let k = &self.kernel;
        let om = k.scaled(self.r, x - y);
        om * (self.psi_dt(t) * k.scaled(self.r0, t - s)
            + self.psi(t) * k.scaled_derivative(self.r0, t - s))
    }

    pub fn phi_s(&self, x: f64, t: f64, y: f64, s: f64) -> f64 {
        let k = &self.kernel;
        -self.psi(t) * k.scaled(self.r, x - y) * k.scaled_derivative(self.r0, t - s)
    }

    /// `φ(·, ·, y, s)` as a test function on `Q_T`.
    pub fn section(&self, y: f64, s: f64) -> Section {
        Section {
            params: self.clone(),
            y,
            s,
        }
    }
}

/// Evaluate `φ(x,t,y,s)`.
pub fn phi_eval(p: &TestFnParams, x: f64, t: f64, y: f64, s: f64) -> f64 {
    p.phi(x, t, y, s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub x: f64,
    pub t: f64,
    pub y: f64,
    pub s: f64,
}

/// Residuals of the two identities `∂tφ + ∂sφ = ψ'(t) ω_r ρ_r0` and
/// `∂xφ + ∂yφ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub time: f64,
    pub space: f64,
}

/// Maximum identity residuals over `probes` with central differences of
/// relative step `h` (`h·r` in space, `h·min(r0, α0)` in time).
///
/// In time both partials are differenced. In space the `x` partial is
/// differenced and the `y` partial taken from the table, since two central
/// differences of a function of `x - y` cancel identically.
pub fn phi_identity_residuals(p: &TestFnParams, probes: &[Probe], h: f64) -> IdentityResiduals {
    let hx = h * p.r;
    let ht = h * p.r0.min(p.alpha0);
    let k = &p.kernel;
    let mut out = IdentityResiduals {
        time: 0.0,
        space: 0.0,
    };
    for q in probes {
        let Probe { x, t, y, s } = *q;
        let fd_t = (p.phi(x, t + ht, y, s) - p.phi(x, t - ht, y, s)) / (2.0 * ht);
        let fd_s = (p.phi(x, t, y, s + ht) - p.phi(x, t, y, s - ht)) / (2.0 * ht);
        let exact = p.psi_dt(t) * k.scaled(p.r, x - y) * k.scaled(p.r0, t - s);
        out.time = out.time.max((fd_t + fd_s - exact).abs());
        let fd_x = (p.phi(x + hx, t, y, s) - p.phi(x - hx, t, y, s)) / (2.0 * hx);
        out.space = out.space.max((fd_x + p.phi_y(x, t, y, s)).abs());
    }
    out
}

/// Closed bounding box of a test function's support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub x: (f64, f64),
    pub t: (f64, f64),
}

/// A test function `φ(x, t)` on `Q_T` with analytic partials.
pub trait TestFunction: Send + Sync {
    fn value(&self, x: f64, t: f64) -> f64;
    fn dt(&self, x: f64, t: f64) -> f64;
    fn dx(&self, x: f64, t: f64) -> f64;
    fn support(&self) -> Support;
}

/// `φ(x, t) = ω_R(x - c) ψ(t)`.
#[derive(Debug, Clone)]
pub struct SeparableTestFn {
    pub center: f64,
    pub radius: f64,
    pub window: TimeWindow,
}

impl SeparableTestFn {
    pub fn new(center: f64, radius: f64, window: TimeWindow) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(Self {
            center,
            radius,
            window,
        })
    }
}

impl TestFunction for SeparableTestFn {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.window.kernel.scaled(self.radius, x - self.center) * self.window.psi(t)
    }

    fn dt(&self, x: f64, t: f64) -> f64 {
        self.window.kernel.scaled(self.radius, x - self.center) * self.window.psi_dt(t)
    }

    fn dx(&self, x: f64, t: f64) -> f64 {
        self.window.kernel.scaled_derivative(self.radius, x - self.center) * self.window.psi(t)
    }

    fn support(&self) -> Support {
        Support {
            x: (self.center - self.radius, self.center + self.radius),
            t: self.window.support(),
        }
    }
}

/// The doubled test function frozen at `(y, s)`.
#[derive(Debug, Clone)]
pub struct Section {
    pub params: TestFnParams,
    pub y: f64,
    pub s: f64,
}

impl TestFunction for Section {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.params.phi(x, t, self.y, self.s)
    }

    fn dt(&self, x: f64, t: f64) -> f64 {
        self.params.phi_t(x, t, self.y, self.s)
    }

    fn dx(&self, x: f64, t: f64) -> f64 {
        self.params.phi_x(x, t, self.y, self.s)
    }

    fn support(&self) -> Support {
        let p = &self.params;
        Support {
            x: (self.y - p.r, self.y + p.r),
            t: (
                (p.nu - p.alpha0).max(self.s - p.r0),
                (p.tau + p.alpha0).min(self.s + p.r0),
            ),
        }
    }
}

/// Replaces the analytic partials of `inner` by central differences.
pub struct FiniteDifferenced<'a> {
    pub inner: &'a dyn TestFunction,
    pub hx: f64,
    pub ht: f64,
}

impl TestFunction for FiniteDifferenced<'_> {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.inner.value(x, t)
    }

    fn dt(&self, x: f64, t: f64) -> f64 {
        (self.inner.value(x, t + self.ht) - self.inner.value(x, t - self.ht)) / (2.0 * self.ht)
    }

    fn dx(&self, x: f64, t: f64) -> f64 {
        (self.inner.value(x + self.hx, t) - self.inner.value(x - self.hx, t)) / (2.0 * self.hx)
    }

    fn support(&self) -> Support {
        let s = self.inner.support();
        Support {
            x: (s.x.0 - self.hx, s.x.1 + self.hx),
            t: (s.t.0 - self.ht, s.t.1 + self.ht),
        }
    }
}

/// A test function sampled at the grid nodes inside its support.
#[derive(Debug, Clone)]
pub struct PhiSamples {
    i0: usize,
    ni: usize,
    j0: usize,
    nj: usize,
    value: Vec<f64>,
    dt: Vec<f64>,
    dx: Vec<f64>,
    /// Half-width of the spatial support.
    pub radius: f64,
}

/// Per-field quantities shared by every `(k, φ)` evaluation.
pub struct EntropyEvaluator<'a> {
    field: &'a SpaceTimeField,
    spec: &'a ProblemSpec,
    velocity: VelocityField1D,
    v_center: Vec<f64>,
    /// `A(w)` per slice.
    a_w: Vec<Vec<f64>>,
    /// Centered `∂x A(w)` per slice.
    a_x: Vec<Vec<f64>>,
    /// Centered `∂x w` per slice.
    w_x: Vec<Vec<f64>>,
    f_w: Vec<Vec<f64>>,
}

fn centered(v: &[f64], dx: f64, bc: BoundaryRule) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (l, r) = match bc {
                BoundaryRule::Periodic => (v[(i + n - 1) % n], v[(i + 1) % n]),
                BoundaryRule::Outflow => (v[i.saturating_sub(1)], v[(i + 1).min(n - 1)]),
            };
            (r - l) / (2.0 * dx)
        })
        .collect()
}

impl<'a> EntropyEvaluator<'a> {
    pub fn new(field: &'a SpaceTimeField, spec: &'a ProblemSpec) -> Self {
        let grid = field.grid;
        let dx = grid.dx();
        let velocity = spec.velocity_field(&grid);
        let v_center = (0..grid.nx).map(|i| velocity.center_value(i)).collect();
        let mut a_w = Vec::with_capacity(field.slices.len());
        let mut a_x = Vec::with_capacity(field.slices.len());
        let mut w_x = Vec::with_capacity(field.slices.len());
        let mut f_w = Vec::with_capacity(field.slices.len());
        for s in &field.slices {
            let a: Vec<f64> = s.values.iter().map(|&w| spec.a.eval(w)).collect();
            a_x.push(centered(&a, dx, spec.bc));
            a_w.push(a);
            w_x.push(centered(&s.values, dx, spec.bc));
            f_w.push(s.values.iter().map(|&w| spec.f.eval(w)).collect());
        }
        Self {
            field,
            spec,
            velocity,
            v_center,
            a_w,
            a_x,
            w_x,
            f_w,
        }
    }

    pub fn field(&self) -> &SpaceTimeField {
        self.field
    }

    /// Sample `φ` on the nodes of its support, rejecting supports that
    /// touch the spatial boundary or the time endpoints.
    pub fn sample(&self, phi: &dyn TestFunction) -> Result<PhiSamples> {
        let g = self.field.grid;
        let tg = self.field.tgrid;
        let sup = phi.support();
        if !(sup.x.0 > g.xmin && sup.x.1 < g.xmax) {
            return Err(Error::Support(format!(
                "x-support [{}, {}] not inside ({}, {})",
                sup.x.0, sup.x.1, g.xmin, g.xmax
            )));
        }
        if !(sup.t.0 > 0.0 && sup.t.1 < tg.horizon) {
            return Err(Error::Support(format!(
                "t-support [{}, {}] not inside (0, {})",
                sup.t.0, sup.t.1, tg.horizon
            )));
        }
        let dx = g.dx();
        let dt = tg.dt();
        let i0 = (((sup.x.0 - g.xmin) / dx).floor().max(0.0) as usize).min(g.nx - 1);
        let i1 = (((sup.x.1 - g.xmin) / dx).ceil() as usize).min(g.nx - 1);
        let j0 = ((sup.t.0 / dt).floor().max(0.0) as usize).min(tg.nt);
        let j1 = ((sup.t.1 / dt).ceil() as usize).min(tg.nt);
        let (ni, nj) = (i1 - i0 + 1, j1 - j0 + 1);
        let mut s = PhiSamples {
            i0,
            ni,
            j0,
            nj,
            value: Vec::with_capacity(ni * nj),
            dt: Vec::with_capacity(ni * nj),
            dx: Vec::with_capacity(ni * nj),
            radius: 0.5 * (sup.x.1 - sup.x.0),
        };
        for j in j0..=j1 {
            let t = tg.time(j);
            for i in i0..=i1 {
                let x = g.center(i);
                s.value.push(phi.value(x, t));
                s.dt.push(phi.dt(x, t));
                s.dx.push(phi.dx(x, t));
            }
        }
        Ok(s)
    }

    /// Visit `(i, j, weight, sample index)` over the support window.
    fn each(&self, p: &PhiSamples, mut visit: impl FnMut(usize, usize, f64, usize)) {
        let dx = self.field.grid.dx();
        for jj in 0..p.nj {
            let j = p.j0 + jj;
            let wt = self.field.tgrid.weight(j) * dx;
            for ii in 0..p.ni {
                visit(p.i0 + ii, j, wt, jj * p.ni + ii);
            }
        }
    }

    pub fn e_hyp(&self, k: f64, p: &PhiSamples) -> f64 {
        let fk = self.spec.f.eval(k);
        let div = &self.velocity.div_values;
        let mut acc = 0.0;
        self.each(p, |i, j, wt, n| {
            let w = self.field.slices[j].values[i];
            let sg = sgn(w - k);
            let term = (w - k).abs() * p.dt[n]
                + sg * (self.v_center[i] * (self.f_w[j][i] - fk) - self.a_x[j][i]) * p.dx[n]
                - sg * div[i] * fk * p.value[n];
            acc += term * wt;
        });
        acc
    }

    /// `∬ |∂x A|² sgn_η'(A(w) - A(k)) φ`, realized on the piecewise-linear
    /// interpolant of `A(w)` between neighbouring cell centers: a segment
    /// of slope `s` contributes `|s|·|band ∩ [A_i, A_{i+1}]|/η` times the
    /// mean of `φ` at its ends.
    pub fn dissipation(&self, k: f64, eta: f64, p: &PhiSamples) -> f64 {
        let ak = self.spec.a.eval(k);
        let (lo, hi) = (ak - eta, ak + eta);
        let dx = self.field.grid.dx();
        let nx = self.field.grid.nx;
        let mut acc = 0.0;
        for jj in 0..p.nj {
            let j = p.j0 + jj;
            let wt = self.field.tgrid.weight(j);
            let a = &self.a_w[j];
            for ii in 0..p.ni.saturating_sub(1) {
                let i = p.i0 + ii;
                if i + 1 >= nx {
                    break;
                }
                let (p0, p1) = (a[i].min(a[i + 1]), a[i].max(a[i + 1]));
                let overlap = (p1.min(hi) - p0.max(lo)).max(0.0);
                if overlap == 0.0 {
                    continue;
                }
                let slope = (p1 - p0) / dx;
                let n = jj * p.ni + ii;
                let phi = 0.5 * (p.value[n] + p.value[n + 1]);
                acc += slope * overlap / eta * phi * wt;
            }
        }
        acc
    }

    /// `E^par` with the `η ↓ 0` limit extrapolated linearly from
    /// `η0, η0/2, η0/4`. Rejects `k` inside a flat region of `A`.
    ///
    /// `η0` is capped at half the distance from `A(k)` to the values `A`
    /// takes on its flat regions, so the band never reaches a plateau.
    pub fn e_par(&self, k: f64, p: &PhiSamples, eta0: f64, flats: &FlatRegions) -> Result<f64> {
        if flats.contains(k) {
            return Err(Error::KInH { k });
        }
        if !(eta0 > 0.0) {
            return Err(Error::Invalid(format!("eta0 must be positive, got {eta0}")));
        }
        let ak = self.spec.a.eval(k);
        let gap = flats
            .intervals
            .iter()
            .map(|&(lo, _)| (self.spec.a.eval(lo) - ak).abs())
            .fold(f64::INFINITY, f64::min);
        let eta0 = eta0.min(0.5 * gap);
        let etas = [eta0, 0.5 * eta0, 0.25 * eta0];
        let d: Vec<f64> = etas.iter().map(|&e| self.dissipation(k, e, p)).collect();
        Ok(self.e_hyp(k, p) - extrapolate_to_zero(&etas, &d))
    }

    /// `ε ∬ |∂x w · ∂x φ|`.
    pub fn r_visc(&self, p: &PhiSamples, eps: f64) -> f64 {
        if eps == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        self.each(p, |i, j, wt, n| {
            acc += (self.w_x[j][i] * p.dx[n]).abs() * wt;
        });
        eps * acc
    }

    /// `∬ w ∂tφ + [V f(w) - ∂x A^ε(w)] ∂xφ`.
    pub fn weak_residual(&self, p: &PhiSamples, eps: f64) -> f64 {
        let mut acc = 0.0;
        self.each(p, |i, j, wt, n| {
            let w = self.field.slices[j].values[i];
            let ax = self.a_x[j][i] + eps * self.w_x[j][i];
            acc += (w * p.dt[n] + (self.v_center[i] * self.f_w[j][i] - ax) * p.dx[n]) * wt;
        });
        acc
    }

    /// `∬ (|φ| + |∂tφ| + |∂xφ|)`.
    pub fn phi_norm(&self, p: &PhiSamples) -> f64 {
        let mut acc = 0.0;
        self.each(p, |_, _, wt, n| {
            acc += (p.value[n].abs() + p.dt[n].abs() + p.dx[n].abs()) * wt;
        });
        acc
    }
}

/// Intercept of the least-squares line through `(x_m, y_m)`.
fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    my - sxy / sxx * mx
}

pub fn e_hyp(w: &SpaceTimeField, spec: &ProblemSpec, k: f64, phi: &dyn TestFunction) -> Result<f64> {
    let ev = EntropyEvaluator::new(w, spec);
    Ok(ev.e_hyp(k, &ev.sample(phi)?))
}

pub fn e_par(
    w: &SpaceTimeField,
    spec: &ProblemSpec,
    k: f64,
    phi: &dyn TestFunction,
    eta0: f64,
) -> Result<f64> {
    let flats = flat_regions(&spec.a)?;
    let ev = EntropyEvaluator::new(w, spec);
    ev.e_par(k, &ev.sample(phi)?, eta0, &flats)
}

pub fn r_visc(w_eps: &SpaceTimeField, spec: &ProblemSpec, phi: &dyn TestFunction, eps: f64) -> Result<f64> {
    let ev = EntropyEvaluator::new(w_eps, spec);
    Ok(ev.r_visc(&ev.sample(phi)?, eps))
}

pub fn weak_residual(
    w: &SpaceTimeField,
    spec: &ProblemSpec,
    phi: &dyn TestFunction,
    eps: f64,
) -> Result<f64> {
    let ev = EntropyEvaluator::new(w, spec);
    Ok(ev.weak_residual(&ev.sample(phi)?, eps))
}

/// Which inequalities an audit enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditMode {
    /// Entropy solution: `E^hyp ≥ -tol`, `|E^par| ≤ tol`.
    Exact,
    /// Viscous solution: `E^hyp, E^par ≥ -R_visc - tol`.
    Approximate,
}

/// Audit tolerances: `η0 = c_eta·dx·Lip(A)` and
/// `tol = c_audit·(dx + R·dx + η0 + Lip(A)·√dx)·∬(|φ| + |∂tφ| + |∂xφ|)`,
/// with `R` the spatial half-width of `φ`. The `√dx` term tracks the
/// slower convergence of the discrete solution next to flat regions of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSettings {
    pub c_audit: f64,
    pub c_eta: f64,
}

impl AuditSettings {
    pub const DEFAULT_C_AUDIT: f64 = 1.0;
    pub const DEFAULT_C_ETA: f64 = 1.0;

    pub fn eta0(&self, dx: f64, lip_a: f64) -> f64 {
        self.c_eta * dx * lip_a
    }

    pub fn tol(&self, dx: f64, radius: f64, lip_a: f64, phi_norm: f64) -> f64 {
        let eta0 = self.eta0(dx, lip_a);
        self.c_audit * (dx + radius * dx + eta0 + lip_a * dx.sqrt()) * phi_norm
    }
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self {
            c_audit: Self::DEFAULT_C_AUDIT,
            c_eta: Self::DEFAULT_C_ETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub k: f64,
    pub phi_index: usize,
    pub e_hyp: f64,
    /// `None` when `k ∈ H`.
    pub e_par: Option<f64>,
    pub r_visc: f64,
    pub tol: f64,
    pub pass_hyp: bool,
    pub pass_par: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub mode: AuditMode,
    pub eps: f64,
    pub eta0: f64,
    pub settings: AuditSettings,
    pub rows: Vec<AuditRow>,
}

impl EntropyReport {
    pub fn all_pass(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.pass_hyp && r.pass_par.unwrap_or(true))
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows
            .iter()
            .filter(|r| !r.pass_hyp || r.pass_par == Some(false))
    }

    pub fn k_values(&self) -> Vec<f64> {
        let mut ks: Vec<f64> = self.rows.iter().map(|r| r.k).collect();
        ks.dedup();
        ks
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "e_hyp", "e_par", "r_visc", "tol", "verdict_hyp", "verdict_par"])?;
        let verdict = |b: bool| if b { "pass" } else { "fail" };
        for r in &self.rows {
            w.write_record([
                crate::io::fmt_f64(r.k),
                crate::io::fmt_f64(r.e_hyp),
                r.e_par.map(crate::io::fmt_f64).unwrap_or_default(),
                crate::io::fmt_f64(r.r_visc),
                crate::io::fmt_f64(r.tol),
                verdict(r.pass_hyp).to_string(),
                r.pass_par.map(|b| verdict(b).to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for EntropyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.rows.len();
        let bad = self.failures().count();
        write!(
            f,
            "{:?} audit (eps={}): {} rows, {} failing",
            self.mode, self.eps, n, bad
        )
    }
}

/// Evaluate every `(k, φ)` pair. Rows are ordered by `k`, then by `φ`.
pub fn audit(
    w: &SpaceTimeField,
    spec: &ProblemSpec,
    ks: &[f64],
    phis: &[&dyn TestFunction],
    eps: f64,
    mode: AuditMode,
    settings: AuditSettings,
) -> Result<EntropyReport> {
    if ks.is_empty() {
        return Err(Error::Invalid("empty k list".into()));
    }
    if phis.is_empty() {
        return Err(Error::Invalid("empty test-function list".into()));
    }
    let flats = flat_regions(&spec.a)?;
    let ev = EntropyEvaluator::new(w, spec);
    let dx = w.grid.dx();
    let eta0 = settings.eta0(dx, spec.a.lipschitz());
    let samples = phis
        .iter()
        .map(|p| ev.sample(*p))
        .collect::<Result<Vec<_>>>()?;
    let per_phi: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| {
            let tol = settings.tol(dx, s.radius, spec.a.lipschitz(), ev.phi_norm(s));
            (tol, ev.r_visc(s, eps))
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..ks.len())
        .flat_map(|a| (0..phis.len()).map(move |b| (a, b)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(a, b)| {
            let k = ks[a];
            let s = &samples[b];
            let (tol, rv) = per_phi[b];
            let eh = ev.e_hyp(k, s);
            let ep = if flats.contains(k) || eta0 == 0.0 {
                None
            } else {
                Some(ev.e_par(k, s, eta0, &flats)?)
            };
            let (pass_hyp, pass_par) = match mode {
                AuditMode::Exact => (eh >= -tol, ep.map(|v| v.abs() <= tol)),
                AuditMode::Approximate => (eh >= -rv - tol, ep.map(|v| v >= -rv - tol)),
            };
            Ok(AuditRow {
                k,
                phi_index: b,
                e_hyp: eh,
                e_par: ep,
                r_visc: rv,
                tol,
                pass_hyp,
                pass_par,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport {
        mode,
        eps,
        eta0,
        settings,
        rows,
    })
}

/// Audit of a viscous solution against the approximate inequalities.
pub fn audit_approximate_entropy(
    w_eps: &SpaceTimeField,
    spec: &ProblemSpec,
    ks: &[f64],
    phis: &[&dyn TestFunction],
    eps: f64,
    settings: AuditSettings,
) -> Result<EntropyReport> {
    audit(w_eps, spec, ks, phis, eps, AuditMode::Approximate, settings)
}

/// `n` equispaced constants over the data range widened by 5% each side;
/// constants landing on a flat-region endpoint move inward by `1e-9·range`.
pub fn default_k_grid(lo: f64, hi: f64, n: usize, flats: &FlatRegions) -> Vec<f64> {
    let range = (hi - lo).max(f64::MIN_POSITIVE);
    let a = lo - 0.05 * range;
    let b = hi + 0.05 * range;
    let nudge = 1e-9 * range;
    (0..n)
        .map(|m| {
            let mut k = if n == 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * m as f64 / (n - 1) as f64
            };
            let hit = 1e-12 * range;
            for &(p, q) in &flats.intervals {
                if (k - p).abs() <= hit {
                    k = p + nudge;
                } else if (k - q).abs() <= hit {
                    k = q - nudge;
                }
            }
            k
        })
        .collect()
}

/// `n` bumps with equispaced centers over the middle 80% of the domain,
/// each of radius `0.75` times the spacing, sharing the window
/// `ν = 0.1T`, `τ = 0.9T`, `α0 = min(ν, T-τ)/2`.
pub fn default_test_functions(xmin: f64, xmax: f64, horizon: f64, n: usize) -> Result<Vec<SeparableTestFn>> {
    if n == 0 {
        return Err(Error::Invalid("need at least one test function".into()));
    }
    let len = xmax - xmin;
    let lo = xmin + 0.1 * len;
    let spacing = 0.8 * len / n as f64;
    let nu = 0.1 * horizon;
    let tau = 0.9 * horizon;
    let window = TimeWindow::new(nu, tau, 0.5 * nu.min(horizon - tau))?;
    (0..n)
        .map(|m| SeparableTestFn::new(lo + (m as f64 + 0.5) * spacing, 0.75 * spacing, window.clone()))
        .collect()
}

//! Problem instances of `∂t w + (V(x) f(w))_x = A(w)_xx` in one space
//! dimension, their hypothesis checks, and the hyperbolic (flat) set of `A`.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid1D, SpaceTimeField};

/// Piecewise-linear interpolant of samples, extended constantly outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFn1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    lip: f64,
    // (origin, spacing) when the breakpoints are equispaced
    uniform: Option<(f64, f64)>,
}

impl ScalarFn1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(Error::InvalidTable(format!(
                "need >= 2 matching samples, got {} abscissae and {} ordinates",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite sample".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let lip = breakpoints
            .windows(2)
            .zip(values.windows(2))
            .map(|(b, v)| ((v[1] - v[0]) / (b[1] - b[0])).abs())
            .fold(0.0, f64::max);
        let h = (breakpoints[breakpoints.len() - 1] - breakpoints[0])
            / (breakpoints.len() - 1) as f64;
        let uniform = breakpoints
            .windows(2)
            .all(|b| ((b[1] - b[0]) - h).abs() <= 1e-9 * h)
            .then_some((breakpoints[0], h));
        Ok(Self {
            breakpoints,
            values,
            lip,
            uniform,
        })
    }

    /// Sample `g` at `n_segments + 1` equispaced breakpoints on `[lo, hi]`.
    pub fn sample(lo: f64, hi: f64, n_segments: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        if n_segments == 0 || !(hi > lo) {
            return Err(Error::InvalidTable(format!(
                "bad sampling range [{lo}, {hi}] with {n_segments} segments"
            )));
        }
        let bps: Vec<f64> = (0..=n_segments)
            .map(|i| {
                if i == n_segments {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / n_segments as f64
                }
            })
            .collect();
        let vals = bps.iter().map(|&w| g(w)).collect();
        Self::new(bps, vals)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.breakpoints[0], self.breakpoints[self.breakpoints.len() - 1])
    }

    /// Maximum absolute slope over all segments.
    pub fn lipschitz(&self) -> f64 {
        self.lip
    }

    pub fn slope(&self, seg: usize) -> f64 {
        (self.values[seg + 1] - self.values[seg])
            / (self.breakpoints[seg + 1] - self.breakpoints[seg])
    }

    pub fn segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    fn segment_of(&self, w: f64) -> usize {
        let last = self.segments() - 1;
        let mut s = match self.uniform {
            Some((o, h)) => (((w - o) / h).floor().max(0.0) as usize).min(last),
            None => self.breakpoints.partition_point(|&b| b <= w).saturating_sub(1).min(last),
        };
        while s > 0 && w < self.breakpoints[s] {
            s -= 1;
        }
        while s < last && w > self.breakpoints[s + 1] {
            s += 1;
        }
        s
    }

    pub fn eval(&self, w: f64) -> f64 {
        let (lo, hi) = self.range();
        if w <= lo {
            return self.values[0];
        }
        if w >= hi {
            return self.values[self.values.len() - 1];
        }
        let s = self.segment_of(w);
        let (b0, b1) = (self.breakpoints[s], self.breakpoints[s + 1]);
        let t = (w - b0) / (b1 - b0);
        self.values[s] * (1.0 - t) + self.values[s + 1] * t
    }

    pub fn contains(&self, w: f64) -> bool {
        let (lo, hi) = self.range();
        (lo..=hi).contains(&w)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|v| v[1] >= v[0])
    }

    /// `g(u) = g0 + ∫_0^u clip(f'(s)) ds`, exact on piecewise-linear data.
    fn split_part(&self, g0: f64, clip: impl Fn(f64) -> f64) -> ScalarFn1D {
        let n = self.breakpoints.len();
        let mut cum = vec![0.0; n];
        for s in 0..self.segments() {
            let h = self.breakpoints[s + 1] - self.breakpoints[s];
            cum[s + 1] = cum[s] + clip(self.slope(s)) * h;
        }
        let tmp = ScalarFn1D {
            breakpoints: self.breakpoints.clone(),
            values: cum,
            lip: 0.0,
            uniform: self.uniform,
        };
        let at_zero = tmp.eval(0.0);
        let values = tmp.values.iter().map(|c| g0 + (c - at_zero)).collect();
        ScalarFn1D::new(self.breakpoints.clone(), values).expect("finite split table")
    }

    /// Increasing part `f⁺(u) = f(0) + ∫_0^u max(f', 0)`.
    pub fn positive_part(&self) -> ScalarFn1D {
        self.split_part(self.eval(0.0), |m| m.max(0.0))
    }

    /// Decreasing part `f⁻(u) = ∫_0^u min(f', 0)`.
    pub fn negative_part(&self) -> ScalarFn1D {
        self.split_part(0.0, |m| m.min(0.0))
    }

    /// Largest `|g(w)|` over the sampled range.
    pub fn sup_on_range(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `A^ε(w) = A(w) + ε w`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionFn {
    pub base: ScalarFn1D,
    pub eps: f64,
}

impl DiffusionFn {
    pub fn new(base: ScalarFn1D, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Invalid(format!("eps must be nonnegative, got {eps}")));
        }
        Ok(Self { base, eps })
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.base.eval(w) + self.eps * w
    }

    pub fn lipschitz(&self) -> f64 {
        self.base.lipschitz() + self.eps
    }
}

/// Continuous description of `V(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile {
    Constant(f64),
    /// `mean + amplitude * sin(wavenumber * x)`
    Sine {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
    },
    Table(ScalarFn1D),
}

impl VelocityProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Sine {
                mean,
                amplitude,
                wavenumber,
            } => mean + amplitude * (wavenumber * x).sin(),
            Self::Table(t) => t.eval(x),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Constant(c) => c.is_finite(),
            Self::Sine {
                mean,
                amplitude,
                wavenumber,
            } => mean.is_finite() && amplitude.is_finite() && wavenumber.is_finite(),
            Self::Table(t) => t.values().iter().all(|v| v.is_finite()),
        }
    }
}

/// `V` sampled at the cell interfaces of a grid, with derived divergence
/// data.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField1D {
    /// `V(x_{i-1/2})`, `i = 0..=nx`.
    pub node_values: Vec<f64>,
    /// `(V_{i+1/2} - V_{i-1/2}) / dx` per cell.
    pub div_values: Vec<f64>,
    pub lip_v: f64,
    pub bv_div: f64,
    pub sup: f64,
}

impl VelocityField1D {
    pub fn sample(profile: &VelocityProfile, grid: &Grid1D, bc: BoundaryRule) -> Self {
        let mut node_values: Vec<f64> =
            (0..=grid.nx).map(|i| profile.eval(grid.interface(i))).collect();
        if bc == BoundaryRule::Periodic {
            node_values[grid.nx] = node_values[0];
        }
        Self::from_nodes(node_values, grid.dx(), bc)
    }

    pub fn from_nodes(node_values: Vec<f64>, dx: f64, bc: BoundaryRule) -> Self {
        let div_values: Vec<f64> = node_values.windows(2).map(|v| (v[1] - v[0]) / dx).collect();
        let lip_v = div_values.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
        let mut bv_div: f64 = div_values.windows(2).map(|d| (d[1] - d[0]).abs()).sum();
        if bc == BoundaryRule::Periodic && div_values.len() > 1 {
            bv_div += (div_values[0] - div_values[div_values.len() - 1]).abs();
        }
        let sup = node_values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        Self {
            node_values,
            div_values,
            lip_v,
            bv_div,
            sup,
        }
    }

    /// `V` at cell center `i` (interface average).
    pub fn center_value(&self, i: usize) -> f64 {
        0.5 * (self.node_values[i] + self.node_values[i + 1])
    }

    pub fn div_sup(&self) -> f64 {
        self.lip_v
    }

    pub fn is_divergence_free(&self) -> bool {
        self.div_values.iter().all(|&d| d == 0.0)
    }
}

/// Initial data `w0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Piecewise constant: `values[0]` left of `breaks[0]`, `values[m]` on
    /// `(breaks[m-1], breaks[m])`, the last value right of the last break.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Piecewise-linear table in `x`, sampled at cell centers.
    Table(ScalarFn1D),
}

impl InitialData {
    pub fn pieces(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 || breaks.windows(2).any(|b| b[1] <= b[0]) {
            return Err(Error::Invalid(
                "piecewise-constant data needs ascending breaks and one more value".into(),
            ));
        }
        Ok(Self::PiecewiseConstant { breaks, values })
    }

    /// Box of height `h` on `[a, b]`, zero elsewhere.
    pub fn boxed(a: f64, b: f64, h: f64) -> Self {
        Self::PiecewiseConstant {
            breaks: vec![a, b],
            values: vec![0.0, h, 0.0],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::PiecewiseConstant { breaks, values } => {
                values[breaks.partition_point(|&b| b <= x)]
            }
            Self::Table(t) => t.eval(x),
        }
    }

    /// Cell averages for piecewise-constant data, center samples for tables.
    pub fn sample(&self, grid: &Grid1D) -> Result<Field> {
        match self {
            Self::PiecewiseConstant { breaks, values } => {
                let dx = grid.dx();
                let vals = (0..grid.nx)
                    .map(|i| {
                        let (lo, hi) = (grid.interface(i), grid.interface(i + 1));
                        let mut acc = 0.0;
                        let mut left = lo;
                        let mut piece = breaks.partition_point(|&b| b <= lo);
                        while left < hi {
                            let right = breaks.get(piece).copied().unwrap_or(hi).min(hi);
                            acc += values[piece] * (right - left);
                            left = right;
                            piece += 1;
                        }
                        acc / dx
                    })
                    .collect();
                Field::new(*grid, vals)
            }
            Self::Table(t) => Field::from_fn(*grid, |x| t.eval(x)),
        }
    }

    fn bounds(&self) -> (f64, f64, bool) {
        let vals: &[f64] = match self {
            Self::PiecewiseConstant { values, .. } => values,
            Self::Table(t) => t.values(),
        };
        let sup = vals.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let tv = vals.windows(2).map(|v| (v[1] - v[0]).abs()).sum();
        (sup, tv, vals.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryRule {
    Periodic,
    Outflow,
}

impl BoundaryRule {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "periodic" => Some(Self::Periodic),
            "outflow" => Some(Self::Outflow),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Periodic => "periodic",
            Self::Outflow => "outflow",
        }
    }
}

/// One instance of the degenerate convection-diffusion problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub f: ScalarFn1D,
    pub a: ScalarFn1D,
    pub velocity: VelocityProfile,
    pub w0: InitialData,
    pub xmin: f64,
    pub xmax: f64,
    pub horizon: f64,
    pub bc: BoundaryRule,
}

impl ProblemSpec {
    pub fn grid(&self, nx: usize) -> Result<Grid1D> {
        Grid1D::new(self.xmin, self.xmax, nx)
    }

    pub fn initial_field(&self, grid: &Grid1D) -> Result<Field> {
        self.w0.sample(grid)
    }

    pub fn velocity_field(&self, grid: &Grid1D) -> VelocityField1D {
        VelocityField1D::sample(&self.velocity, grid, self.bc)
    }

    pub fn diffusion(&self, eps: f64) -> Result<DiffusionFn> {
        DiffusionFn::new(self.a.clone(), eps)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_domain(mut self, xmin: f64, xmax: f64) -> Self {
        self.xmin = xmin;
        self.xmax = xmax;
        self
    }

    /// Custom problem from two CSV tables: `w,f,a` and `x,v,w0`.
    pub fn from_csv(
        name: &str,
        coeffs: &Path,
        profile: &Path,
        horizon: f64,
        bc: BoundaryRule,
    ) -> Result<Self> {
        let c = read_columns(coeffs, &["w", "f", "a"])?;
        let p = read_columns(profile, &["x", "v", "w0"])?;
        let f = ScalarFn1D::new(c[0].clone(), c[1].clone())?;
        let a = ScalarFn1D::new(c[0].clone(), c[2].clone())?;
        let v = ScalarFn1D::new(p[0].clone(), p[1].clone())?;
        let w0 = ScalarFn1D::new(p[0].clone(), p[2].clone())?;
        let (xmin, xmax) = v.range();
        Ok(Self {
            name: name.to_string(),
            f,
            a,
            velocity: VelocityProfile::Table(v),
            w0: InitialData::Table(w0),
            xmin,
            xmax,
            horizon,
            bc,
        })
    }
}

pub(crate) fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let idx = names
        .iter()
        .map(|n| {
            headers.iter().position(|h| h == *n).ok_or_else(|| {
                Error::InvalidTable(format!("{}: missing column '{n}'", path.display()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (c, &k) in idx.iter().enumerate() {
            let cell = rec.get(k).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| {
                Error::InvalidTable(format!(
                    "{}: row {}: bad number '{cell}'",
                    path.display(),
                    row + 2
                ))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// A clause of the standing hypotheses on `(V, f, A, w0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    VBounded,
    VLipschitz,
    DivVBv,
    FLipschitz,
    FZeroAtZero,
    ALipschitz,
    ANondecreasing,
    AZeroAtZero,
    W0Bounded,
    W0Bv,
    PositiveHorizon,
    NonemptyDomain,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::VBounded => "V bounded",
            Self::VLipschitz => "V Lipschitz",
            Self::DivVBv => "div V in BV",
            Self::FLipschitz => "f locally Lipschitz",
            Self::FZeroAtZero => "f(0)=0",
            Self::ALipschitz => "A locally Lipschitz",
            Self::ANondecreasing => "A nondecreasing",
            Self::AZeroAtZero => "A(0)=0",
            Self::W0Bounded => "w0 bounded",
            Self::W0Bv => "w0 in BV",
            Self::PositiveHorizon => "T > 0",
            Self::NonemptyDomain => "nonempty domain",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    pub detail: String,
}

/// Violated hypotheses; empty when the instance is admissible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, h: Hypothesis) -> bool {
        self.violations.iter().any(|v| v.hypothesis == h)
    }

    fn push(&mut self, hypothesis: Hypothesis, detail: impl Into<String>) {
        self.violations.push(Violation {
            hypothesis,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "all hypotheses hold");
        }
        for v in &self.violations {
            writeln!(f, "violated: {} ({})", v.hypothesis, v.detail)?;
        }
        Ok(())
    }
}

/// Check `(V, f, A, w0)` against the standing hypotheses. Pure.
pub fn validate_problem(spec: &ProblemSpec) -> ValidationReport {
    let mut r = ValidationReport::default();
    if !(spec.xmin.is_finite() && spec.xmax.is_finite() && spec.xmax > spec.xmin) {
        r.push(
            Hypothesis::NonemptyDomain,
            format!("[{}, {}]", spec.xmin, spec.xmax),
        );
    }
    if !(spec.horizon.is_finite() && spec.horizon > 0.0) {
        r.push(Hypothesis::PositiveHorizon, format!("T = {}", spec.horizon));
    }

    if !spec.velocity.is_finite() {
        r.push(Hypothesis::VBounded, "non-finite velocity data");
    } else if let Ok(grid) = Grid1D::new(spec.xmin, spec.xmax, 1024) {
        let v = spec.velocity_field(&grid);
        if !v.sup.is_finite() {
            r.push(Hypothesis::VBounded, "sup |V| not finite");
        }
        if !v.lip_v.is_finite() {
            r.push(Hypothesis::VLipschitz, "Lip(V) not finite");
        }
        if !v.bv_div.is_finite() {
            r.push(Hypothesis::DivVBv, "|div V|_BV not finite");
        }
    }

    if !spec.f.lipschitz().is_finite() {
        r.push(Hypothesis::FLipschitz, "Lip(f) not finite");
    }
    let f0 = spec.f.eval(0.0);
    if f0 != 0.0 {
        r.push(Hypothesis::FZeroAtZero, format!("f(0) = {f0}"));
    }
    if !spec.a.lipschitz().is_finite() {
        r.push(Hypothesis::ALipschitz, "Lip(A) not finite");
    }
    if !spec.a.is_nondecreasing() {
        let seg = spec
            .a
            .values()
            .windows(2)
            .position(|v| v[1] < v[0])
            .unwrap_or(0);
        r.push(
            Hypothesis::ANondecreasing,
            format!(
                "A decreases on [{}, {}]",
                spec.a.breakpoints()[seg],
                spec.a.breakpoints()[seg + 1]
            ),
        );
    }
    let a0 = spec.a.eval(0.0);
    if a0 != 0.0 {
        r.push(Hypothesis::AZeroAtZero, format!("A(0) = {a0}"));
    }

    let (sup, tv, finite) = spec.w0.bounds();
    if !finite || !sup.is_finite() {
        r.push(Hypothesis::W0Bounded, "non-finite initial data");
    }
    if !tv.is_finite() {
        r.push(Hypothesis::W0Bv, "TV(w0) not finite");
    }
    r
}

/// Maximal closed state intervals on which `A` is constant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatRegions {
    pub intervals: Vec<(f64, f64)>,
}

impl FlatRegions {
    pub fn contains(&self, w: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= w && w <= hi)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Zero-slope segments of a nondecreasing `A`, merged into maximal intervals.
pub fn flat_regions(a: &ScalarFn1D) -> Result<FlatRegions> {
    if !a.is_nondecreasing() {
        return Err(Error::NotMonotone(
            "flat regions need a nondecreasing A".into(),
        ));
    }
    let b = a.breakpoints();
    let v = a.values();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for s in 0..a.segments() {
        if v[s + 1] == v[s] {
            match intervals.last_mut() {
                Some(last) if last.1 == b[s] => last.1 = b[s + 1],
                _ => intervals.push((b[s], b[s + 1])),
            }
        }
    }
    Ok(FlatRegions { intervals })
}

/// Nodes whose state lies in a flat region: `mask[j][i]`.
pub fn hyperbolic_mask(field: &SpaceTimeField, regions: &FlatRegions) -> Vec<Vec<bool>> {
    field
        .slices
        .iter()
        .map(|s| s.values.iter().map(|&w| regions.contains(w)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TimeGrid;

    fn burgers() -> ScalarFn1D {
        ScalarFn1D::sample(-1.0, 1.0, 200, |w| 0.5 * w * w).unwrap()
    }

    fn degenerate_a() -> ScalarFn1D {
        ScalarFn1D::sample(-1.0, 1.0, 200, |w| (w - 0.25).max(0.0).powi(2)).unwrap()
    }

    fn spec_with(f: ScalarFn1D, a: ScalarFn1D) -> ProblemSpec {
        ProblemSpec {
            name: "t".into(),
            f,
            a,
            velocity: VelocityProfile::Constant(1.0),
            w0: InitialData::pieces(vec![0.0], vec![1.0, -1.0]).unwrap(),
            xmin: -1.0,
            xmax: 1.0,
            horizon: 1.0,
            bc: BoundaryRule::Outflow,
        }
    }

    #[test]
    fn breakpoints_reproduce_ordinates() {
        let f = burgers();
        for (b, v) in f.breakpoints().iter().zip(f.values()) {
            assert_eq!(f.eval(*b), *v);
        }
        assert_eq!(f.eval(5.0), 0.5);
        assert_eq!(f.eval(-5.0), 0.5);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ScalarFn1D::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(ScalarFn1D::new(vec![0.0], vec![1.0]).is_err());
        assert!(ScalarFn1D::new(vec![0.0, 1.0], vec![f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn burgers_problem_is_valid() {
        let lin = ScalarFn1D::new(vec![-1.0, 1.0], vec![-1.0, 1.0]).unwrap();
        let r = validate_problem(&spec_with(burgers(), lin));
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn decreasing_a_is_reported() {
        let a = ScalarFn1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 0.3]).unwrap();
        let r = validate_problem(&spec_with(burgers(), a));
        assert!(r.contains(Hypothesis::ANondecreasing));
    }

    #[test]
    fn shifted_f_is_reported() {
        let f = ScalarFn1D::sample(-1.0, 1.0, 20, |w| w + 0.1).unwrap();
        let r = validate_problem(&spec_with(f, degenerate_a()));
        assert!(r.contains(Hypothesis::FZeroAtZero));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn validation_is_pure() {
        let a = ScalarFn1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 0.3]).unwrap();
        let s = spec_with(burgers(), a);
        assert_eq!(validate_problem(&s), validate_problem(&s));
    }

    #[test]
    fn flat_region_cases() {
        let zero = ScalarFn1D::sample(-1.0, 1.0, 10, |_| 0.0).unwrap();
        assert_eq!(flat_regions(&zero).unwrap().intervals, vec![(-1.0, 1.0)]);
        let lin = ScalarFn1D::sample(-1.0, 1.0, 10, |w| w).unwrap();
        assert!(flat_regions(&lin).unwrap().is_empty());
        assert_eq!(
            flat_regions(&degenerate_a()).unwrap().intervals,
            vec![(-1.0, 0.25)]
        );
        let bad = ScalarFn1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 0.3]).unwrap();
        assert!(flat_regions(&bad).is_err());
    }

    #[test]
    fn mask_membership() {
        let regions = flat_regions(&degenerate_a()).unwrap();
        let g = Grid1D::new(-1.0, 1.0, 8).unwrap();
        let tg = TimeGrid::new(1.0, 2).unwrap();
        let half = SpaceTimeField::steady(&Field::constant(g, 0.5), tg);
        assert!(hyperbolic_mask(&half, &regions).iter().flatten().all(|m| !m));
        let zero = SpaceTimeField::steady(&Field::constant(g, 0.0), tg);
        assert!(hyperbolic_mask(&zero, &regions).iter().flatten().all(|m| *m));
        let step = SpaceTimeField::from_fn(g, tg, |x, _| if x < 0.0 { -0.5 } else { 0.75 }).unwrap();
        for row in hyperbolic_mask(&step, &regions) {
            for (i, m) in row.iter().enumerate() {
                assert_eq!(*m, g.center(i) < 0.0);
            }
        }
    }

    #[test]
    fn eo_split_sums_to_f() {
        let f = burgers();
        let (p, m) = (f.positive_part(), f.negative_part());
        for k in 0..=40 {
            let w = -1.0 + k as f64 * 0.05;
            assert!((p.eval(w) + m.eval(w) - f.eval(w)).abs() < 1e-15);
        }
        assert!((p.eval(1.0) - 0.5).abs() < 1e-15);
        assert!((m.eval(-1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_cell_averages() {
        let g = Grid1D::new(-2.0, 2.0, 100).unwrap();
        let w0 = InitialData::boxed(-0.5, 0.5, 1.0).sample(&g).unwrap();
        let mass: f64 = w0.values.iter().sum::<f64>() * g.dx();
        assert!((mass - 1.0).abs() < 1e-12);
        // edge at -0.5 falls mid-cell (cell 37 spans [-0.52, -0.48])
        assert!((w0.values[37] - 0.5).abs() < 1e-12);
    }
}

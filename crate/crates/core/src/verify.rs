//! Named, tolerance-checked residuals on warped-product charts, and the
//! built-in example catalog.
//!
//! Everything here measures tensors in a `g`-orthonormal frame, so
//! residuals are comparable across charts of different scale. Level sets of
//! the potential are the slices `r = const` of a warped chart.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::ode::{integrate, Classification, Direction, Limits, ProfileState, SolitonParams, SolitonProfile, Start};
use crate::tensor::{
    curvature_with_weyl, grad_norm_sq_differential, gradient_and_hessian, orthonormal_frame, riemann_ricci_scalar, MetricChart,
    ScalarField, DEFAULT_STEP,
};
use crate::warped::{
    build_chart, closed_form_curvature, einstein_ode_residual, warped_chart, weyl_closed_form, AnalyticWarping, FiberGeometry, SphereFactor,
    WarpedChart,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    /// Pass when `residual <= tolerance`.
    #[default]
    Upper,
    /// Pass when `residual >= tolerance` (quantities that must stay away from zero).
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    pub sample_count: usize,
    #[serde(skip)]
    pub bound: Bound,
}

impl Check {
    pub fn upper(name: impl Into<String>, residual: f64, tolerance: f64, sample_count: usize) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            sample_count,
            bound: Bound::Upper,
        }
    }

    pub fn lower(name: impl Into<String>, residual: f64, tolerance: f64, sample_count: usize) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual >= tolerance,
            sample_count,
            bound: Bound::Lower,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub overall_pass: bool,
    pub provenance: Map<String, Value>,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>, mut provenance: Map<String, Value>) -> Self {
        let overall_pass = checks.iter().all(|c| c.pass);
        let counts: Map<String, Value> = checks.iter().map(|c| (c.name.clone(), json!(c.sample_count))).collect();
        provenance.insert("sample_counts".into(), Value::Object(counts));
        Self {
            checks,
            overall_pass,
            provenance,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `index`-th element of the van der Corput sequence in `base`.
pub fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut out = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        out += f * (index % base) as f64;
        index /= base;
    }
    out
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Sample points `(r, u)` organised by level `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub levels: Vec<f64>,
    pub fiber_points: Vec<Vec<f64>>,
}

impl Grid {
    /// `count` Halton points in `[-w, w]^dim`.
    pub fn halton(levels: Vec<f64>, dim: usize, count: usize, w: f64) -> Result<Self> {
        if dim > PRIMES.len() {
            return Err(Error::Dimension(format!("fiber dimension {dim} too large for the point sequence")));
        }
        let fiber_points = (1..=count)
            .map(|i| (0..dim).map(|d| w * (2.0 * halton(i, PRIMES[d]) - 1.0)).collect())
            .collect();
        Ok(Self { levels, fiber_points })
    }

    /// Grid on a warped chart: points fill 90% of the fiber box.
    pub fn for_chart(chart: &WarpedChart, levels: Vec<f64>, count: usize) -> Result<Self> {
        Self::halton(levels, chart.fiber.fiber_dim(), count, 0.9 * chart.fiber.chart_half_width())
    }

    pub fn level_points(&self, level: usize) -> Vec<Vec<f64>> {
        let r = self.levels[level];
        self.fiber_points
            .iter()
            .map(|u| {
                let mut x = Vec::with_capacity(u.len() + 1);
                x.push(r);
                x.extend_from_slice(u);
                x
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.levels.len()).flat_map(|i| self.level_points(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len() * self.fiber_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn describe(&self) -> Value {
        json!({"levels": self.levels, "fiber_points": self.fiber_points.len(), "sequence": "halton"})
    }
}

/// `count` levels evenly spaced strictly inside `[lo, hi]`.
pub fn even_levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64).collect()
}

fn frame_at(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    orthonormal_frame(g).ok_or_else(|| Error::Degenerate(x.to_vec()))
}

fn sym_in_frame(t: &DMatrix<f64>, fr: &DMatrix<f64>) -> DMatrix<f64> {
    fr.transpose() * t * fr
}

fn max_over<F>(points: &[Vec<f64>], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut worst: f64 = 0.0;
    for x in points {
        let v = f(x)?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

/// `max |Hess f - (R - rho) g|` over the grid.
pub fn soliton_residual(chart: &MetricChart, f: &ScalarField, rho: f64, grid: &Grid, h: f64) -> Result<f64> {
    max_over(&grid.points(), |x| {
        let curv = riemann_ricci_scalar(chart, x, h)?;
        let gh = gradient_and_hessian(chart, f, x, h)?;
        let t = &gh.hessian - &curv.metric * (curv.scalar - rho);
        Ok(sym_in_frame(&t, &frame_at(&curv.metric, x)?).amax())
    })
}

/// `max |grad |grad f|^2 - 2 (R - rho) grad f|` over the grid.
pub fn gradient_identity_residual(chart: &MetricChart, f: &ScalarField, rho: f64, grid: &Grid, h: f64) -> Result<f64> {
    max_over(&grid.points(), |x| {
        let curv = riemann_ricci_scalar(chart, x, h)?;
        let gh = gradient_and_hessian(chart, f, x, h)?;
        let d = grad_norm_sq_differential(chart, f, x, h)?;
        let v: DVector<f64> = d - &gh.differential * (2.0 * (curv.scalar - rho));
        Ok(v.dot(&(&curv.inverse * &v)).max(0.0).sqrt())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelQuantity {
    GradNormSq,
    Scalar,
    /// Trace of the Weingarten map of the level set, from chart data.
    MeanCurvature,
}

struct LevelGeometry {
    norm_sq: f64,
    scalar: f64,
    mean_curvature: f64,
    /// `h_ab - ((R - rho)/|grad f|) g_ab` on tangent vectors, orthonormal frame.
    umbilicity: f64,
}

fn level_geometry(chart: &MetricChart, f: &ScalarField, rho: f64, x: &[f64], h: f64) -> Result<LevelGeometry> {
    let curv = riemann_ricci_scalar(chart, x, h)?;
    let gh = gradient_and_hessian(chart, f, x, h)?;
    let n = chart.dim();
    let norm = gh.norm_sq.sqrt();
    let nu = &gh.gradient / norm;
    let nu_flat = &gh.metric * &nu;
    let tangential_inverse = &gh.inverse - &nu * nu.transpose();
    let mean_curvature = tangential_inverse.component_mul(&gh.hessian).sum() / norm;
    let t = (&gh.hessian - &gh.metric * (curv.scalar - rho)) / norm;
    let proj = DMatrix::identity(n, n) - &nu * nu_flat.transpose();
    let tangential = proj.transpose() * t * &proj;
    Ok(LevelGeometry {
        norm_sq: gh.norm_sq,
        scalar: curv.scalar,
        mean_curvature,
        umbilicity: sym_in_frame(&tangential, &frame_at(&gh.metric, x)?).amax(),
    })
}

fn variation(values: &[f64]) -> f64 {
    if values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Largest variation of `quantity` over the points of one level, over all
/// levels of the grid.
pub fn level_set_constancy(chart: &MetricChart, f: &ScalarField, rho: f64, quantity: LevelQuantity, grid: &Grid, h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..grid.levels.len() {
        let mut vals = Vec::with_capacity(grid.fiber_points.len());
        for x in grid.level_points(i) {
            let g = level_geometry(chart, f, rho, &x, h)?;
            vals.push(match quantity {
                LevelQuantity::GradNormSq => g.norm_sq,
                LevelQuantity::Scalar => g.scalar,
                LevelQuantity::MeanCurvature => g.mean_curvature,
            });
        }
        let v = variation(&vals);
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

pub fn umbilicity_residual(chart: &MetricChart, f: &ScalarField, rho: f64, grid: &Grid, h: f64) -> Result<f64> {
    max_over(&grid.points(), |x| Ok(level_geometry(chart, f, rho, x, h)?.umbilicity))
}

/// Ricci eigenvalue data of the level sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinSpread {
    /// Largest spread of the eigenvalues of `Ric` restricted to the tangent
    /// spaces of a level, over all levels.
    pub tangential_spread: f64,
    /// Largest variation of `Ric(nu, nu)` along a level.
    pub radial_variation: f64,
}

/// Eigenvalues of `Ric` on `nu^perp` and `Ric(nu, nu)`, in an orthonormal frame.
fn split_ricci(ric: &DMatrix<f64>, g: &DMatrix<f64>, nu: &DVector<f64>, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = g.nrows();
    let fr = frame_at(g, x)?;
    let ric_f = sym_in_frame(ric, &fr);
    let nu_f = fr.transpose() * g * nu;
    let nu_f = &nu_f / nu_f.norm();
    let pivot = nu_f.iamax();
    let mut m = DMatrix::zeros(n, n);
    m.set_column(0, &nu_f);
    for (col, i) in (1..).zip((0..n).filter(|&i| i != pivot)) {
        m[(i, col)] = 1.0;
    }
    let q = m.qr().q();
    let basis = q.columns(1, n - 1).into_owned();
    let restricted = basis.transpose() * &ric_f * &basis;
    let eig = restricted.symmetric_eigen();
    let radial = (nu_f.transpose() * &ric_f * &nu_f)[(0, 0)];
    Ok((eig.eigenvalues.iter().cloned().collect(), radial))
}

pub fn einstein_fiber_check(chart: &MetricChart, f: &ScalarField, grid: &Grid, h: f64) -> Result<EinsteinSpread> {
    let mut out = EinsteinSpread {
        tangential_spread: 0.0,
        radial_variation: 0.0,
    };
    for i in 0..grid.levels.len() {
        let mut tangential = Vec::new();
        let mut radial = Vec::new();
        for x in grid.level_points(i) {
            let curv = riemann_ricci_scalar(chart, &x, h)?;
            let gh = gradient_and_hessian(chart, f, &x, h)?;
            let (eigs, rad) = split_ricci(&curv.ricci, &curv.metric, &gh.gradient, &x)?;
            tangential.extend(eigs);
            radial.push(rad);
        }
        out.tangential_spread = out.tangential_spread.max(variation(&tangential));
        out.radial_variation = out.radial_variation.max(variation(&radial));
    }
    Ok(out)
}

/// Largest orthonormal-frame discrepancy between closed-form and
/// finite-difference curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureDiscrepancy {
    pub riemann: f64,
    pub ricci: f64,
    pub scalar: f64,
    pub weyl: f64,
}

impl CurvatureDiscrepancy {
    pub fn max(&self) -> f64 {
        self.riemann.max(self.ricci).max(self.scalar).max(self.weyl)
    }

    pub fn fields(&self) -> [(&'static str, f64); 4] {
        [("riemann", self.riemann), ("ricci", self.ricci), ("scalar", self.scalar), ("weyl", self.weyl)]
    }
}

pub fn closed_vs_numeric(chart: &WarpedChart, grid: &Grid, h: f64) -> Result<CurvatureDiscrepancy> {
    let mut d = CurvatureDiscrepancy {
        riemann: 0.0,
        ricci: 0.0,
        scalar: 0.0,
        weyl: 0.0,
    };
    for x in grid.points() {
        let s = chart.warping.sample(x[0]);
        let closed = closed_form_curvature(&s, &chart.fiber, Some(&x[1..]))?;
        let num = curvature_with_weyl(&chart.chart, &x, h)?;
        let fr = frame_at(&num.metric, &x)?;
        let wn = num.weyl.as_ref().expect("weyl requested");
        d.riemann = d.riemann.max(closed.riemann.in_frame(&fr).max_diff(&num.riemann.in_frame(&fr)));
        d.ricci = d.ricci.max(sym_in_frame(&(&closed.ricci - &num.ricci), &fr).amax());
        d.scalar = d.scalar.max((closed.scalar - num.scalar).abs());
        d.weyl = d.weyl.max(closed.weyl.in_frame(&fr).max_diff(&wn.in_frame(&fr)));
    }
    Ok(d)
}

/// Ratio of a residual at `h` to the same residual at `h/2`; about 4 for a
/// second-order quantity.
pub fn halving_ratio<F>(h: f64, residual: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(residual(h)? / residual(0.5 * h)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylComparison {
    /// Largest orthonormal-frame component of the closed-form Weyl tensor.
    pub closed_max: f64,
    pub numeric_max: f64,
    /// Largest coordinate component `|W_1a1b|` of the closed form.
    pub radial_closed_max: f64,
    /// The closed form vanished identically at every grid point.
    pub closed_exactly_zero: bool,
}

pub fn conformal_flatness_check(chart: &WarpedChart, grid: &Grid, h: f64) -> Result<WeylComparison> {
    let n = chart.n();
    let mut out = WeylComparison {
        closed_max: 0.0,
        numeric_max: 0.0,
        radial_closed_max: 0.0,
        closed_exactly_zero: true,
    };
    for x in grid.points() {
        let s = chart.warping.sample(x[0]);
        let ft = chart.fiber.tensors(Some(&x[1..]))?;
        let w = weyl_closed_form(&s, &chart.fiber, n, &ft)?;
        out.closed_exactly_zero &= w.is_exactly_zero();
        out.radial_closed_max = out.radial_closed_max.max(w.radial.amax());
        let num = curvature_with_weyl(&chart.chart, &x, h)?;
        let fr = frame_at(&num.metric, &x)?;
        out.closed_max = out.closed_max.max(w.assemble().in_frame(&fr).max_abs());
        out.numeric_max = out.numeric_max.max(num.weyl.as_ref().expect("weyl requested").in_frame(&fr).max_abs());
    }
    Ok(out)
}

/// `max |Ric - lambda g|` over the grid.
pub fn einstein_metric_residual(chart: &MetricChart, lambda: f64, grid: &Grid, h: f64) -> Result<f64> {
    max_over(&grid.points(), |x| {
        let curv = riemann_ricci_scalar(chart, x, h)?;
        let t = &curv.ricci - &curv.metric * lambda;
        Ok(sym_in_frame(&t, &frame_at(&curv.metric, x)?).amax())
    })
}

/// Suite settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub h: f64,
    /// Overrides every upper-bound tolerance when set.
    pub tolerance: Option<f64>,
    pub levels: usize,
    pub fiber_points: usize,
    /// Full check names or entry prefixes; `None` runs everything.
    pub selection: Option<Vec<String>>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            h: DEFAULT_STEP,
            tolerance: None,
            levels: 5,
            fiber_points: 20,
            selection: None,
        }
    }
}

impl SuiteOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 0.05) {
            return Err(Error::Config(format!("step h must lie in (0, 0.05), got {}", self.h)));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.levels == 0 || self.fiber_points == 0 {
            return Err(Error::Config("grid needs at least one level and one fiber point".into()));
        }
        Ok(())
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

/// Error constant `C` of the second-order checks: finite-difference
/// residuals must stay below `C h^2` (`1e-5` at the default step).
pub const FD_CONSTANT: f64 = 10.0;

pub fn fd_tolerance(h: f64) -> f64 {
    FD_CONSTANT * h * h
}
/// Accepted band `|ratio - 4|` for h-halving ratios.
pub const RATIO_BAND: f64 = 0.5;
/// Tolerance for quantities that hold exactly by construction.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Checks on a chart built from `profile`.
struct ChartChecks<'a> {
    prefix: &'a str,
    opts: &'a SuiteOptions,
    out: Vec<Check>,
}

impl ChartChecks<'_> {
    fn upper(&mut self, name: &str, residual: f64, default_tol: f64, count: usize) {
        let tol = self.opts.tol(default_tol);
        self.out.push(Check::upper(format!("{}/{}", self.prefix, name), residual, tol, count));
    }

    fn exact(&mut self, name: &str, residual: f64, tol: f64, count: usize) {
        self.out.push(Check::upper(format!("{}/{}", self.prefix, name), residual, tol, count));
    }

    fn lower(&mut self, name: &str, residual: f64, tol: f64, count: usize) {
        self.out.push(Check::lower(format!("{}/{}", self.prefix, name), residual, tol, count));
    }

    fn ratio(&mut self, name: &str, ratio: f64) {
        self.exact(name, (ratio - 4.0).abs(), RATIO_BAND, 2);
    }
}

/// Check names produced by [`profile_checks`].
pub const PROFILE_CHECKS: &[&str] = &[
    "scalar_identity",
    "ode_consistency",
    "potential_increasing",
    "soliton",
    "soliton_convergence",
    "gradient_identity",
    "gradient_identity_convergence",
    "level_grad_norm_sq",
    "level_scalar",
    "level_mean_curvature",
    "umbilicity",
    "einstein_fiber_spread",
    "radial_ricci_variation",
];

/// Soliton-identity and level-set checks for a solved profile on `window`.
pub fn profile_checks(
    prefix: &str,
    profile: &SolitonProfile,
    fiber: &FiberGeometry,
    window: (f64, f64),
    levels: Vec<f64>,
    opts: &SuiteOptions,
) -> Result<Vec<Check>> {
    let wc = build_chart(profile, fiber, window)?;
    let grid = Grid::for_chart(&wc, levels, opts.fiber_points)?;
    let f = wc.potential.clone().expect("profile charts carry a potential");
    let rho = profile.params().rho;
    let h = opts.h;
    let count = grid.len();
    let mut c = ChartChecks { prefix, opts, out: Vec::new() };
    c.exact("scalar_identity", profile.scalar_identity_residual(), EXACT_TOLERANCE, profile.samples().len());
    c.exact("ode_consistency", profile.ode_residual(), 1e-9, profile.samples().len());
    c.exact("potential_increasing", if profile.potential_increasing() { 0.0 } else { 1.0 }, 0.0, profile.samples().len());

    let sol = |h: f64| soliton_residual(&wc.chart, &f, rho, &grid, h);
    let s_h = sol(h)?;
    c.upper("soliton", s_h, fd_tolerance(h), count);
    c.ratio("soliton_convergence", s_h / sol(0.5 * h)?);
    let gid = |h: f64| gradient_identity_residual(&wc.chart, &f, rho, &grid, h);
    let g_h = gid(h)?;
    c.upper("gradient_identity", g_h, fd_tolerance(h), count);
    c.ratio("gradient_identity_convergence", g_h / gid(0.5 * h)?);
    for (name, q) in [
        ("level_grad_norm_sq", LevelQuantity::GradNormSq),
        ("level_scalar", LevelQuantity::Scalar),
        ("level_mean_curvature", LevelQuantity::MeanCurvature),
    ] {
        c.upper(name, level_set_constancy(&wc.chart, &f, rho, q, &grid, h)?, fd_tolerance(h), count);
    }
    c.upper("umbilicity", umbilicity_residual(&wc.chart, &f, rho, &grid, h)?, fd_tolerance(h), count);
    let e = einstein_fiber_check(&wc.chart, &f, &grid, h)?;
    c.upper("einstein_fiber_spread", e.tangential_spread, fd_tolerance(h), count);
    c.upper("radial_ricci_variation", e.radial_variation, fd_tolerance(h), count);
    Ok(c.out)
}

/// Fiber implied by a profile's parameters: the space form with scalar
/// curvature `Rbar`.
pub fn default_fiber(params: &SolitonParams) -> Result<FiberGeometry> {
    let m = params.n - 1;
    let k = params.rbar / ((m * (m - 1)) as f64);
    if k > 0.0 {
        FiberGeometry::round_sphere(m, k)
    } else if k < 0.0 {
        FiberGeometry::hyperbolic(m, k)
    } else {
        FiberGeometry::flat(m)
    }
}

/// Default chart window for a profile: stays where `phi >= 0.1` and away
/// from the ends, at most 10 long.
pub fn default_window(profile: &SolitonProfile) -> Result<(f64, f64)> {
    let s = profile.samples();
    let (lo, hi) = (s[0].r, s[s.len() - 1].r);
    let pad = 0.05 * (hi - lo);
    let start = s
        .iter()
        .find(|q| q.r >= lo + pad && q.phi >= 0.1)
        .map(|q| q.r)
        .ok_or_else(|| Error::Input("profile never reaches phi >= 0.1".into()))?;
    let end = (hi - pad).min(start + 10.0);
    if !(end > start) {
        return Err(Error::Input("profile domain too short for a chart window".into()));
    }
    Ok((start, end))
}

type EntryRun = fn(&SuiteOptions) -> Result<(Vec<Check>, Value)>;

struct Entry {
    name: &'static str,
    checks: &'static [&'static str],
    run: EntryRun,
}

const EXPANDER_EXTRA: &[&str] = &["classification", "exact_solution"];
const PRODUCT_EXTRA: &[&str] = &["classification", "exact_solution"];
const STEADY_EXTRA: &[&str] = &["classification"];

#[allow(clippy::too_many_arguments)]
fn profile_entry(
    prefix: &str,
    opts: &SuiteOptions,
    params: SolitonParams,
    start: Start,
    limits: Limits,
    fiber: FiberGeometry,
    window: (f64, f64),
    levels: Vec<f64>,
    expected: Classification,
    exact: Option<fn(f64) -> f64>,
) -> Result<(Vec<Check>, Value)> {
    let profile = integrate(&params, start, Direction::Forward, &limits)?;
    let mut checks = profile_checks(prefix, &profile, &fiber, window, levels.clone(), opts)?;
    let mut c = ChartChecks { prefix, opts, out: Vec::new() };
    c.exact("classification", if profile.classification() == expected { 0.0 } else { 1.0 }, 0.0, 1);
    if let Some(exact) = exact {
        let err = profile.samples().iter().map(|s| (s.phi - exact(s.r)).abs()).fold(0.0, f64::max);
        c.exact("exact_solution", err, 1e-10, profile.samples().len());
    }
    checks.extend(c.out);
    let prov = json!({
        "params": params,
        "start": start,
        "r_max": limits.r_max,
        "fiber": fiber.label(),
        "window": [window.0, window.1],
        "levels": levels,
        "classification": profile.classification(),
    });
    Ok((checks, prov))
}

fn flat_expander(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let params = SolitonParams::new(4, -1.0, 6.0)?;
    let limits = Limits { r_max: 10.0, ..Limits::default() };
    profile_entry(
        "flat_expander",
        opts,
        params,
        Start::origin(1.0),
        limits,
        FiberGeometry::round_sphere(3, 1.0)?,
        (1.0, 9.0),
        even_levels(1.0, 9.0, opts.levels),
        Classification::RotationallySymmetric,
        Some(|r| r),
    )
}

fn product_soliton(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let params = SolitonParams::new(3, 1.0, 4.0)?;
    let limits = Limits { r_max: 20.0, ..Limits::default() };
    profile_entry(
        "product_soliton",
        opts,
        params,
        Start::State(ProfileState::new(0.0, 2.0, 0.0)),
        limits,
        FiberGeometry::round_sphere(2, 2.0)?,
        (1.0, 19.0),
        even_levels(1.0, 19.0, opts.levels),
        Classification::CylinderType,
        Some(|_| 2.0),
    )
}

fn steady_n3(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let params = SolitonParams::new(3, 0.0, 2.0)?;
    let limits = Limits { r_max: 50.0, ..Limits::default() };
    profile_entry(
        "steady_n3",
        opts,
        params,
        Start::origin(1.0),
        limits,
        FiberGeometry::round_sphere(2, 1.0)?,
        (0.5, 5.5),
        // five levels give r = 1, 2, 3, 4, 5
        even_levels(0.0, 6.0, opts.levels),
        Classification::RotationallySymmetric,
        None,
    )
}

const HYPERBOLIC_CHECKS: &[&str] = &["einstein_ode", "einstein_metric", "closed_vs_numeric", "weyl_closed_zero", "weyl_numeric"];

/// `dr^2 + cosh^2 r g_H`: hyperbolic space, Einstein with `lambda = -(n-1)`.
fn hyperbolic_einstein(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let n = 4;
    let nf = n as f64;
    let fiber = FiberGeometry::hyperbolic(n - 1, -1.0)?;
    let warping = Arc::new(AnalyticWarping::cosh());
    let window = (1.0, 2.0);
    let wc = warped_chart(warping.clone(), &fiber, window)?;
    let grid = Grid::for_chart(&wc, even_levels(window.0, window.1, opts.levels), opts.fiber_points)?;
    let h = opts.h;
    let mut c = ChartChecks {
        prefix: "hyperbolic_einstein",
        opts,
        out: Vec::new(),
    };
    let ode = grid
        .levels
        .iter()
        .map(|&r| einstein_ode_residual(&crate::warped::WarpingFunction::sample(&*warping, r), -(nf - 1.0), -(nf - 2.0), n).abs())
        .fold(0.0, f64::max);
    c.exact("einstein_ode", ode, EXACT_TOLERANCE, grid.levels.len());
    c.upper("einstein_metric", einstein_metric_residual(&wc.chart, -(nf - 1.0), &grid, h)?, fd_tolerance(h), grid.len());
    c.upper("closed_vs_numeric", closed_vs_numeric(&wc, &grid, h)?.max(), fd_tolerance(h), grid.len());
    let w = conformal_flatness_check(&wc, &grid, h)?;
    c.exact("weyl_closed_zero", if w.closed_exactly_zero { 0.0 } else { w.closed_max.max(f64::MIN_POSITIVE) }, 0.0, grid.len());
    c.upper("weyl_numeric", w.numeric_max, fd_tolerance(h), grid.len());
    Ok((c.out, json!({"n": n, "warping": "cosh r", "fiber": fiber.label(), "window": [window.0, window.1]})))
}

const S2S2_CHECKS: &[&str] = &["weyl_closed_nonzero", "weyl_radial_zero", "weyl_numeric_match", "einstein_fiber_spread"];

/// `dr^2 + S^2 x S^2` with unit factors: Einstein fiber that is not a space form.
fn s2xs2_fiber(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let fiber = FiberGeometry::product_of_spheres(vec![SphereFactor { dim: 2, radius: 1.0 }, SphereFactor { dim: 2, radius: 1.0 }])?;
    let window = (0.0, 1.0);
    let wc = warped_chart(Arc::new(AnalyticWarping::constant(1.0)), &fiber, window)?;
    let grid = Grid::for_chart(&wc, even_levels(window.0, window.1, opts.levels), opts.fiber_points)?;
    let h = opts.h;
    let mut c = ChartChecks {
        prefix: "s2xs2_fiber",
        opts,
        out: Vec::new(),
    };
    let w = conformal_flatness_check(&wc, &grid, h)?;
    c.lower("weyl_closed_nonzero", w.closed_max, 1e-3, grid.len());
    c.exact("weyl_radial_zero", w.radial_closed_max, 0.0, grid.len());
    c.upper("weyl_numeric_match", closed_vs_numeric(&wc, &grid, h)?.weyl, fd_tolerance(h), grid.len());
    let f = wc.potential.clone().expect("analytic warping carries a potential");
    c.upper("einstein_fiber_spread", einstein_fiber_check(&wc.chart, &f, &grid, h)?.tangential_spread, fd_tolerance(h), grid.len());
    Ok((c.out, json!({"n": 5, "warping": "1", "fiber": fiber.label(), "window": [window.0, window.1]})))
}

const NON_EINSTEIN_CHECKS: &[&str] = &["einstein_gap", "weyl_numeric_match"];

/// Constant scalar curvature fiber `S^2(1) x S^2(2)` that is not Einstein;
/// the tangential Ricci eigenvalues differ by `1 - 1/4`.
fn non_einstein_fiber(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let fiber = FiberGeometry::product_of_spheres(vec![SphereFactor { dim: 2, radius: 1.0 }, SphereFactor { dim: 2, radius: 2.0 }])?;
    let window = (0.0, 1.0);
    let wc = warped_chart(Arc::new(AnalyticWarping::constant(1.0)), &fiber, window)?;
    let grid = Grid::for_chart(&wc, even_levels(window.0, window.1, opts.levels), opts.fiber_points)?;
    let h = opts.h;
    let f = wc.potential.clone().expect("analytic warping carries a potential");
    let mut c = ChartChecks {
        prefix: "non_einstein_fiber",
        opts,
        out: Vec::new(),
    };
    c.lower("einstein_gap", einstein_fiber_check(&wc.chart, &f, &grid, h)?.tangential_spread, 0.5, grid.len());
    c.upper("weyl_numeric_match", closed_vs_numeric(&wc, &grid, h)?.weyl, fd_tolerance(h), grid.len());
    Ok((c.out, json!({"n": 5, "warping": "1", "fiber": fiber.label(), "window": [window.0, window.1]})))
}

const SINE_CHECKS: &[&str] = &[
    "sphere_n3",
    "sphere_n4",
    "sphere_n5",
    "hyperbolic_n3",
    "hyperbolic_n4",
    "hyperbolic_n5",
    "flat_n3",
    "flat_n4",
    "flat_n5",
    "sphere_n3_convergence",
    "sphere_n4_convergence",
    "sphere_n5_convergence",
    "hyperbolic_n3_convergence",
    "hyperbolic_n4_convergence",
    "hyperbolic_n5_convergence",
    "flat_n3_convergence",
    "flat_n4_convergence",
    "flat_n5_convergence",
];

/// Closed forms against finite differences for `phi = 2 + 0.3 sin r`.
fn sine_warped(opts: &SuiteOptions) -> Result<(Vec<Check>, Value)> {
    let mut c = ChartChecks {
        prefix: "sine_warped",
        opts,
        out: Vec::new(),
    };
    let mut ratios = Vec::new();
    let window = (0.0, 3.0);
    for kind in ["sphere", "hyperbolic", "flat"] {
        for n in 3..=5 {
            let fiber = match kind {
                "sphere" => FiberGeometry::round_sphere(n - 1, 1.0)?,
                "hyperbolic" => FiberGeometry::hyperbolic(n - 1, -1.0)?,
                _ => FiberGeometry::flat(n - 1)?,
            };
            let wc = warped_chart(Arc::new(AnalyticWarping::sine(2.0, 0.3)), &fiber, window)?;
            let grid = Grid::for_chart(&wc, even_levels(window.0, window.1, opts.levels), opts.fiber_points)?;
            let at_h = closed_vs_numeric(&wc, &grid, opts.h)?;
            let at_half = closed_vs_numeric(&wc, &grid, 0.5 * opts.h)?;
            c.upper(&format!("{kind}_n{n}"), at_h.max(), fd_tolerance(opts.h), grid.len());
            ratios.push((format!("{kind}_n{n}_convergence"), at_h.max() / at_half.max()));
        }
    }
    for (name, r) in ratios {
        c.ratio(&name, r);
    }
    Ok((c.out, json!({"warping": "2 + 0.3 sin r", "window": [window.0, window.1]})))
}

fn catalog() -> Vec<Entry> {
    vec![
        Entry {
            name: "flat_expander",
            checks: &[],
            run: flat_expander,
        },
        Entry {
            name: "product_soliton",
            checks: &[],
            run: product_soliton,
        },
        Entry {
            name: "steady_n3",
            checks: &[],
            run: steady_n3,
        },
        Entry {
            name: "hyperbolic_einstein",
            checks: HYPERBOLIC_CHECKS,
            run: hyperbolic_einstein,
        },
        Entry {
            name: "s2xs2_fiber",
            checks: S2S2_CHECKS,
            run: s2xs2_fiber,
        },
        Entry {
            name: "non_einstein_fiber",
            checks: NON_EINSTEIN_CHECKS,
            run: non_einstein_fiber,
        },
        Entry {
            name: "sine_warped",
            checks: SINE_CHECKS,
            run: sine_warped,
        },
    ]
}

fn entry_checks(e: &Entry) -> Vec<String> {
    let extra: &[&str] = match e.name {
        "flat_expander" => EXPANDER_EXTRA,
        "product_soliton" => PRODUCT_EXTRA,
        "steady_n3" => STEADY_EXTRA,
        _ => &[],
    };
    let own: Vec<&str> = if e.checks.is_empty() {
        PROFILE_CHECKS.iter().chain(extra).copied().collect()
    } else {
        e.checks.to_vec()
    };
    own.into_iter().map(|c| format!("{}/{}", e.name, c)).collect()
}

/// Every check name of the built-in catalog, in report order.
pub fn catalog_check_names() -> Vec<String> {
    catalog().iter().flat_map(entry_checks).collect()
}

fn selected(name: &str, selection: &Option<Vec<String>>) -> bool {
    match selection {
        None => true,
        Some(sel) => sel.iter().any(|s| s == name || name.split('/').next() == Some(s.as_str())),
    }
}

/// Resolves a selection against the catalog; unknown names are a config error.
pub fn validate_selection(selection: &[String]) -> Result<()> {
    let names = catalog_check_names();
    let entries: Vec<&str> = catalog().iter().map(|e| e.name).collect();
    for s in selection {
        if !names.contains(s) && !entries.contains(&s.as_str()) {
            return Err(Error::Config(format!("unknown check '{s}'")));
        }
    }
    Ok(())
}

/// Runs the catalog (or the selected part) in parallel and assembles the
/// report in catalog order.
pub fn run_catalog(opts: &SuiteOptions) -> Result<VerificationReport> {
    opts.validate()?;
    if let Some(sel) = &opts.selection {
        validate_selection(sel)?;
    }
    let entries: Vec<Entry> = catalog()
        .into_iter()
        .filter(|e| entry_checks(e).iter().any(|c| selected(c, &opts.selection)))
        .collect();
    let results: Vec<Result<(Vec<Check>, Value)>> = entries.par_iter().map(|e| (e.run)(opts)).collect();
    let mut checks = Vec::new();
    let mut prov_entries = Map::new();
    for (e, r) in entries.iter().zip(results) {
        let (cs, prov) = r?;
        checks.extend(cs.into_iter().filter(|c| selected(&c.name, &opts.selection)));
        prov_entries.insert(e.name.to_string(), prov);
    }
    Ok(VerificationReport::new(checks, suite_provenance(opts, prov_entries)))
}

fn suite_provenance(opts: &SuiteOptions, entries: Map<String, Value>) -> Map<String, Value> {
    let mut p = Map::new();
    p.insert("h".into(), json!(opts.h));
    p.insert("tolerance_override".into(), json!(opts.tolerance));
    p.insert(
        "grid".into(),
        json!({"levels": opts.levels, "fiber_points": opts.fiber_points, "sequence": "halton", "frame": "orthonormal"}),
    );
    p.insert("entries".into(), Value::Object(entries));
    p
}

/// Suite on a user-supplied profile: profile checks on `window` (or the
/// default window) with the given fiber (or the space form matching `Rbar`).
pub fn run_profile(profile: &SolitonProfile, fiber: Option<FiberGeometry>, window: Option<(f64, f64)>, opts: &SuiteOptions) -> Result<VerificationReport> {
    opts.validate()?;
    let fiber = match fiber {
        Some(f) => f,
        None => default_fiber(profile.params())?,
    };
    let window = match window {
        Some(w) => w,
        None => default_window(profile)?,
    };
    if let Some(sel) = &opts.selection {
        for s in sel {
            if s != "profile" && !PROFILE_CHECKS.iter().any(|c| format!("profile/{c}") == *s) {
                return Err(Error::Config(format!("unknown check '{s}'")));
            }
        }
    }
    let levels = even_levels(window.0, window.1, opts.levels);
    let checks = profile_checks("profile", profile, &fiber, window, levels, opts)?
        .into_iter()
        .filter(|c| selected(&c.name, &opts.selection))
        .collect();
    let mut entries = Map::new();
    entries.insert(
        "profile".into(),
        json!({"params": profile.params(), "fiber": fiber.label(), "window": [window.0, window.1], "samples": profile.samples().len()}),
    );
    Ok(VerificationReport::new(checks, suite_provenance(opts, entries)))
}

//! Closed-form geometry of warped products `g = dr^2 + phi(r)^2 gbar`.
//!
//! Coordinates are `(r, u^2, ..., u^n)` with `u` a chart on the fiber; index 0
//! is the radial direction. All fiber tensors are taken at unit scale and
//! `phi` carries every `r`-dependence.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{ProfileInterpolant, SolitonProfile};
use crate::tensor::{kulkarni_nomizu, weyl_from_parts, MetricChart, ScalarField, Tensor4};

/// One round-sphere factor of a product fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereFactor {
    pub dim: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FiberKind {
    RoundSphere { curvature: f64 },
    Hyperbolic { curvature: f64 },
    Flat,
    ProductOfRoundSpheres(Vec<SphereFactor>),
    /// Only the scalar curvature is known; tensor-valued operations refuse it.
    AbstractConstantScalar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BlockChart {
    /// `4/(K (1+|u|^2)^2) delta`
    Stereographic,
    /// `4/(|K| (1-|u|^2)^2) delta`
    Poincare,
    Euclidean,
}

/// Constant-curvature block of the fiber: indices `start..start+len`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Block {
    start: usize,
    len: usize,
    curvature: f64,
    chart: BlockChart,
}

impl Block {
    fn ricci_eigenvalue(&self) -> f64 {
        if self.len < 2 {
            0.0
        } else {
            self.curvature * (self.len as f64 - 1.0)
        }
    }

    fn conformal_factor(&self, u: &[f64]) -> f64 {
        let s: f64 = u[self.start..self.start + self.len].iter().map(|v| v * v).sum();
        match self.chart {
            BlockChart::Stereographic => 4.0 / (self.curvature * (1.0 + s).powi(2)),
            BlockChart::Poincare => 4.0 / (self.curvature.abs() * (1.0 - s).powi(2)),
            BlockChart::Euclidean => 1.0,
        }
    }
}

/// `(N^{n-1}, gbar)` with closed-form curvature data.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberGeometry {
    fiber_dim: usize,
    kind: FiberKind,
    scalar_curvature: f64,
    einstein_constant: Option<f64>,
    is_space_form: bool,
    blocks: Vec<Block>,
}

/// Fiber tensors in a chosen basis (coordinates at a point, or orthonormal).
#[derive(Clone, Debug)]
pub struct FiberTensors {
    pub metric: DMatrix<f64>,
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    /// Traceless Ricci `Ric - (R/(n-1)) gbar`; exactly zero for Einstein fibers.
    pub traceless_ricci: DMatrix<f64>,
    pub weyl: Tensor4,
}

const EINSTEIN_RTOL: f64 = 1e-12;

impl FiberGeometry {
    fn check_dim(fiber_dim: usize) -> Result<()> {
        if fiber_dim < 2 {
            Err(Error::Dimension(format!("fiber dimension {fiber_dim} < 2")))
        } else {
            Ok(())
        }
    }

    fn single(fiber_dim: usize, kind: FiberKind, curvature: f64, chart: BlockChart) -> Self {
        let m = fiber_dim as f64;
        Self {
            fiber_dim,
            kind,
            scalar_curvature: curvature * m * (m - 1.0),
            einstein_constant: Some(curvature * (m - 1.0)),
            is_space_form: true,
            blocks: vec![Block {
                start: 0,
                len: fiber_dim,
                curvature,
                chart,
            }],
        }
    }

    /// Round sphere of sectional curvature `curvature > 0`.
    pub fn round_sphere(fiber_dim: usize, curvature: f64) -> Result<Self> {
        Self::check_dim(fiber_dim)?;
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::Config(format!("sphere curvature must be positive, got {curvature}")));
        }
        Ok(Self::single(fiber_dim, FiberKind::RoundSphere { curvature }, curvature, BlockChart::Stereographic))
    }

    pub fn hyperbolic(fiber_dim: usize, curvature: f64) -> Result<Self> {
        Self::check_dim(fiber_dim)?;
        if !(curvature < 0.0 && curvature.is_finite()) {
            return Err(Error::Config(format!("hyperbolic curvature must be negative, got {curvature}")));
        }
        Ok(Self::single(fiber_dim, FiberKind::Hyperbolic { curvature }, curvature, BlockChart::Poincare))
    }

    pub fn flat(fiber_dim: usize) -> Result<Self> {
        Self::check_dim(fiber_dim)?;
        Ok(Self::single(fiber_dim, FiberKind::Flat, 0.0, BlockChart::Euclidean))
    }

    pub fn product_of_spheres(factors: Vec<SphereFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Config("product fiber needs at least one factor".into()));
        }
        let mut blocks = Vec::with_capacity(factors.len());
        let mut start = 0;
        for f in &factors {
            if f.dim == 0 || !(f.radius > 0.0 && f.radius.is_finite()) {
                return Err(Error::Config(format!("invalid sphere factor {f:?}")));
            }
            blocks.push(Block {
                start,
                len: f.dim,
                curvature: 1.0 / (f.radius * f.radius),
                chart: BlockChart::Stereographic,
            });
            start += f.dim;
        }
        let fiber_dim = start;
        Self::check_dim(fiber_dim)?;
        let scalar_curvature = blocks
            .iter()
            .map(|b| b.len as f64 * (b.len as f64 - 1.0) * b.curvature)
            .sum();
        let lambda0 = blocks[0].ricci_eigenvalue();
        let einstein = blocks
            .iter()
            .all(|b| (b.ricci_eigenvalue() - lambda0).abs() <= EINSTEIN_RTOL * lambda0.abs().max(1.0));
        let is_space_form = blocks.len() == 1 || blocks.iter().all(|b| b.len == 1);
        Ok(Self {
            fiber_dim,
            kind: FiberKind::ProductOfRoundSpheres(factors),
            scalar_curvature,
            einstein_constant: einstein.then_some(lambda0),
            is_space_form,
            blocks,
        })
    }

    /// Fiber known only through its (constant) scalar curvature.
    pub fn abstract_constant_scalar(fiber_dim: usize, scalar_curvature: f64) -> Result<Self> {
        Self::check_dim(fiber_dim)?;
        Ok(Self {
            fiber_dim,
            kind: FiberKind::AbstractConstantScalar,
            scalar_curvature,
            einstein_constant: None,
            is_space_form: false,
            blocks: Vec::new(),
        })
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn kind(&self) -> &FiberKind {
        &self.kind
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.scalar_curvature
    }

    pub fn einstein_constant(&self) -> Option<f64> {
        self.einstein_constant
    }

    pub fn is_space_form(&self) -> bool {
        self.is_space_form
    }

    pub fn has_tensor_data(&self) -> bool {
        !matches!(self.kind, FiberKind::AbstractConstantScalar)
    }

    fn require_tensors(&self) -> Result<()> {
        if self.has_tensor_data() {
            Ok(())
        } else {
            Err(Error::InsufficientFiberData(self.label()))
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            FiberKind::RoundSphere { curvature } => format!("sphere({curvature})"),
            FiberKind::Hyperbolic { curvature } => format!("hyperbolic({curvature})"),
            FiberKind::Flat => "flat".into(),
            FiberKind::ProductOfRoundSpheres(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| format!("S{}({})", f.dim, f.radius)).collect();
                parts.join("x")
            }
            FiberKind::AbstractConstantScalar => format!("abstract(Rbar={})", self.scalar_curvature),
        }
    }

    /// Eigenvalues of the fiber Ricci operator with respect to `gbar`, one
    /// per fiber direction.
    pub fn ricci_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_tensors()?;
        Ok(self
            .blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.ricci_eigenvalue(), b.len))
            .collect())
    }

    /// Half-width of the coordinate box on which the fiber chart is used; the
    /// box sits inside the ball `|u| <= 1/2`.
    pub fn chart_half_width(&self) -> f64 {
        0.5 / (self.fiber_dim as f64).sqrt()
    }

    /// Coordinate metric `gbar_ab(u)`.
    pub fn coordinate_metric(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.require_tensors()?;
        if u.len() != self.fiber_dim {
            return Err(Error::Dimension(format!("fiber point has {} coordinates, fiber dim {}", u.len(), self.fiber_dim)));
        }
        Ok(self.coordinate_metric_unchecked(u))
    }

    fn coordinate_metric_unchecked(&self, u: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.fiber_dim, self.fiber_dim);
        for b in &self.blocks {
            let c = b.conformal_factor(u);
            for i in b.start..b.start + b.len {
                g[(i, i)] = c;
            }
        }
        g
    }

    /// Closed-form fiber tensors at the fiber point `u` in coordinates, or in
    /// a `gbar`-orthonormal frame when `u` is `None`.
    pub fn tensors(&self, u: Option<&[f64]>) -> Result<FiberTensors> {
        self.require_tensors()?;
        let m = self.fiber_dim;
        let gbar = match u {
            Some(u) => self.coordinate_metric(u)?,
            None => DMatrix::identity(m, m),
        };
        let mut riemann = Tensor4::zeros(m);
        let mut ricci = DMatrix::zeros(m, m);
        for b in &self.blocks {
            let range = b.start..b.start + b.len;
            for a in range.clone() {
                for c in range.clone() {
                    ricci[(a, c)] = b.ricci_eigenvalue() * gbar[(a, c)];
                    for d in range.clone() {
                        for e in range.clone() {
                            let v = b.curvature * (gbar[(a, d)] * gbar[(c, e)] - gbar[(a, e)] * gbar[(c, d)]);
                            riemann.set(a, c, d, e, v);
                        }
                    }
                }
            }
        }
        let mut traceless = DMatrix::zeros(m, m);
        if self.einstein_constant.is_none() {
            let mean = self.scalar_curvature / m as f64;
            for b in &self.blocks {
                for a in b.start..b.start + b.len {
                    traceless[(a, a)] = (b.ricci_eigenvalue() - mean) * gbar[(a, a)];
                }
            }
        }
        // a constant-curvature tensor is pure trace, so its Weyl part vanishes identically
        let weyl = if m < 3 || self.is_space_form {
            Tensor4::zeros(m)
        } else {
            weyl_from_parts(&riemann, &ricci, self.scalar_curvature, &gbar)?
        };
        Ok(FiberTensors {
            metric: gbar,
            riemann,
            ricci,
            scalar: self.scalar_curvature,
            traceless_ricci: traceless,
            weyl,
        })
    }
}

/// Warping function and its first two derivatives at `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpingSample {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

impl WarpingSample {
    pub fn new(r: f64, phi: f64, dphi: f64, ddphi: f64) -> Self {
        Self { r, phi, dphi, ddphi }
    }

    fn nonsingular(&self) -> Result<()> {
        if self.phi == 0.0 || !self.phi.is_finite() {
            Err(Error::SingularSample(self.phi))
        } else {
            Ok(())
        }
    }
}

fn check_n(fiber: &FiberGeometry, n: usize) -> Result<()> {
    if n != fiber.fiber_dim() + 1 {
        return Err(Error::Dimension(format!("n = {n} but fiber dimension is {}", fiber.fiber_dim())));
    }
    Ok(())
}

/// Components of the warped-product Riemann tensor as coefficients on the
/// fiber tensors:
/// `R_1a1b = radial gbar_ab`, `R_1abc = 0`,
/// `R_abcd = fiber_scale Rbar_abcd + gauss (gbar_ac gbar_bd - gbar_ad gbar_bc)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannClosedForm {
    pub radial: f64,
    pub fiber_scale: f64,
    pub gauss: f64,
}

/// Writes the radial block `T_0a0b = m_ab` with the symmetries of a
/// curvature tensor.
fn place_radial(out: &mut Tensor4, radial: &DMatrix<f64>) {
    let m = radial.nrows();
    for a in 0..m {
        for b in 0..m {
            let v = radial[(a, b)];
            out.set(0, a + 1, 0, b + 1, v);
            out.set(a + 1, 0, b + 1, 0, v);
            out.set(0, a + 1, b + 1, 0, -v);
            out.set(a + 1, 0, 0, b + 1, -v);
        }
    }
}

fn place_fiber(out: &mut Tensor4, fiber: &Tensor4) {
    let m = fiber.dim();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    out.set(a + 1, b + 1, c + 1, d + 1, fiber.get(a, b, c, d));
                }
            }
        }
    }
}

impl RiemannClosedForm {
    pub fn assemble(&self, ft: &FiberTensors) -> Tensor4 {
        let m = ft.metric.nrows();
        let mut out = Tensor4::zeros(m + 1);
        place_radial(&mut out, &(&ft.metric * self.radial));
        let mut fib = Tensor4::zeros(m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let g = &ft.metric;
                        let v = self.fiber_scale * ft.riemann.get(a, b, c, d)
                            + self.gauss * (g[(a, c)] * g[(b, d)] - g[(a, d)] * g[(b, c)]);
                        fib.set(a, b, c, d, v);
                    }
                }
            }
        }
        place_fiber(&mut out, &fib);
        out
    }
}

pub fn riemann_closed_form(s: &WarpingSample, fiber: &FiberGeometry) -> Result<RiemannClosedForm> {
    fiber.require_tensors()?;
    Ok(RiemannClosedForm {
        radial: -s.phi * s.ddphi,
        fiber_scale: s.phi * s.phi,
        gauss: -(s.phi * s.dphi).powi(2),
    })
}

/// `R_11 = radial`, `R_1a = 0`, `R_ab = Rbar_ab - shift gbar_ab`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicciClosedForm {
    pub radial: f64,
    pub shift: f64,
}

impl RicciClosedForm {
    pub fn assemble(&self, ft: &FiberTensors) -> DMatrix<f64> {
        let m = ft.metric.nrows();
        let mut out = DMatrix::zeros(m + 1, m + 1);
        out[(0, 0)] = self.radial;
        let fib = &ft.ricci - &ft.metric * self.shift;
        out.view_mut((1, 1), (m, m)).copy_from(&fib);
        out
    }
}

pub fn ricci_closed_form(s: &WarpingSample, fiber: &FiberGeometry, n: usize) -> Result<RicciClosedForm> {
    check_n(fiber, n)?;
    s.nonsingular()?;
    let nf = n as f64;
    Ok(RicciClosedForm {
        radial: -(nf - 1.0) * s.ddphi / s.phi,
        shift: (nf - 2.0) * s.dphi * s.dphi + s.phi * s.ddphi,
    })
}

/// `R = Rbar/phi^2 - (n-1)(n-2)(phi'/phi)^2 - 2(n-1) phi''/phi`.
pub fn scalar_closed_form(s: &WarpingSample, rbar: f64, n: usize) -> Result<f64> {
    s.nonsingular()?;
    let nf = n as f64;
    let q = s.dphi / s.phi;
    Ok(rbar / (s.phi * s.phi) - (nf - 1.0) * (nf - 2.0) * q * q - 2.0 * (nf - 1.0) * s.ddphi / s.phi)
}

/// Weyl tensor of the warped product: `W_1a1b = radial_ab`, `W_1abc = 0`,
/// `W_abcd = fiber_abcd`.
#[derive(Clone, Debug)]
pub struct WeylClosedForm {
    pub radial: DMatrix<f64>,
    pub fiber: Tensor4,
}

impl WeylClosedForm {
    pub fn assemble(&self) -> Tensor4 {
        let m = self.radial.nrows();
        let mut out = Tensor4::zeros(m + 1);
        place_radial(&mut out, &self.radial);
        place_fiber(&mut out, &self.fiber);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.radial.amax().max(self.fiber.max_abs())
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.radial.iter().all(|&v| v == 0.0) && self.fiber.is_exactly_zero()
    }
}

/// Weyl components from the fiber data.
///
/// `W_1a1b = Rbar gbar_ab/((n-1)(n-2)) - Rbar_ab/(n-2)` does not involve `phi`.
/// The fiber block is `phi^2 (Wbar + E o gbar/((n-2)(n-3)))` with `E` the
/// traceless fiber Ricci tensor; for Einstein fibers `E = 0` and this is
/// `phi^2 Wbar`.
pub fn weyl_closed_form(s: &WarpingSample, fiber: &FiberGeometry, n: usize, ft: &FiberTensors) -> Result<WeylClosedForm> {
    check_n(fiber, n)?;
    fiber.require_tensors()?;
    let nf = n as f64;
    let m = n - 1;
    let radial = &ft.traceless_ricci * (-1.0 / (nf - 2.0));
    let mut fib = Tensor4::zeros(m);
    if n >= 4 {
        let eg = kulkarni_nomizu(&ft.traceless_ricci, &ft.metric);
        let c = 1.0 / ((nf - 2.0) * (nf - 3.0));
        let scale = s.phi * s.phi;
        for a in 0..m {
            for b in 0..m {
                for cc in 0..m {
                    for d in 0..m {
                        let v = ft.weyl.get(a, b, cc, d) + c * eg.get(a, b, cc, d);
                        fib.set(a, b, cc, d, if v == 0.0 { 0.0 } else { scale * v });
                    }
                }
            }
        }
    }
    Ok(WeylClosedForm { radial, fiber: fib })
}

/// Second fundamental form `h_ab = coefficient g_ab` and mean curvature of the
/// level set `{r} x N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetShape {
    pub coefficient: f64,
    pub mean_curvature: f64,
}

pub fn second_fundamental_form(s: &WarpingSample, n: usize) -> Result<LevelSetShape> {
    s.nonsingular()?;
    let coefficient = s.dphi / s.phi;
    Ok(LevelSetShape {
        coefficient,
        mean_curvature: (n as f64 - 1.0) * coefficient,
    })
}

/// `(phi')^2 + lambda phi^2/(n-1) - lambda_bar/(n-2)`; zero iff the warped
/// product over an Einstein fiber is Einstein with these constants.
pub fn einstein_ode_residual(s: &WarpingSample, lambda: f64, lambda_bar: f64, n: usize) -> f64 {
    let nf = n as f64;
    s.dphi * s.dphi + lambda * s.phi * s.phi / (nf - 1.0) - lambda_bar / (nf - 2.0)
}

/// Closed-form curvature of a warped product in chart coordinates.
#[derive(Clone, Debug)]
pub struct ClosedFormCurvature {
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub weyl: Tensor4,
}

/// All closed-form curvature at `(r, u)`; `u = None` gives components in the
/// frame `(d_r, gbar-orthonormal)`.
pub fn closed_form_curvature(s: &WarpingSample, fiber: &FiberGeometry, u: Option<&[f64]>) -> Result<ClosedFormCurvature> {
    let n = fiber.fiber_dim() + 1;
    let ft = fiber.tensors(u)?;
    Ok(ClosedFormCurvature {
        riemann: riemann_closed_form(s, fiber)?.assemble(&ft),
        ricci: ricci_closed_form(s, fiber, n)?.assemble(&ft),
        scalar: scalar_closed_form(s, fiber.scalar_curvature(), n)?,
        weyl: weyl_closed_form(s, fiber, n, &ft)?.assemble(),
    })
}

/// A warping function `phi(r)` with derivatives, optionally with the
/// potential `f` it came from (`f' = phi`).
pub trait WarpingFunction: Send + Sync {
    fn sample(&self, r: f64) -> WarpingSample;

    fn potential(&self, _r: f64) -> Option<f64> {
        None
    }

    /// Interval on which `sample` is valid.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Warping function given by explicit formulas.
#[derive(Clone)]
pub struct AnalyticWarping {
    phi: RealFn,
    dphi: RealFn,
    ddphi: RealFn,
    potential: Option<RealFn>,
}

impl fmt::Debug for AnalyticWarping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AnalyticWarping(..)")
    }
}

impl AnalyticWarping {
    pub fn new(phi: RealFn, dphi: RealFn, ddphi: RealFn, potential: Option<RealFn>) -> Self {
        Self {
            phi,
            dphi,
            ddphi,
            potential,
        }
    }

    /// `phi = c`, `f = c r`.
    pub fn constant(c: f64) -> Self {
        Self::new(Arc::new(move |_| c), Arc::new(|_| 0.0), Arc::new(|_| 0.0), Some(Arc::new(move |r| c * r)))
    }

    /// `phi = r`, `f = r^2/2`.
    pub fn linear() -> Self {
        Self::new(Arc::new(|r| r), Arc::new(|_| 1.0), Arc::new(|_| 0.0), Some(Arc::new(|r| 0.5 * r * r)))
    }

    /// `phi = cosh r`, `f = sinh r`.
    pub fn cosh() -> Self {
        Self::new(Arc::new(f64::cosh), Arc::new(f64::sinh), Arc::new(f64::cosh), Some(Arc::new(f64::sinh)))
    }

    /// `phi = a + b sin r`.
    pub fn sine(a: f64, b: f64) -> Self {
        Self::new(
            Arc::new(move |r| a + b * r.sin()),
            Arc::new(move |r| b * r.cos()),
            Arc::new(move |r| -b * r.sin()),
            Some(Arc::new(move |r| a * r - b * r.cos())),
        )
    }
}

impl WarpingFunction for AnalyticWarping {
    fn sample(&self, r: f64) -> WarpingSample {
        WarpingSample::new(r, (self.phi)(r), (self.dphi)(r), (self.ddphi)(r))
    }

    fn potential(&self, r: f64) -> Option<f64> {
        self.potential.as_ref().map(|p| p(r))
    }
}

/// Metric chart of `dr^2 + phi(r)^2 gbar(u)` over `window x [-w, w]^{n-1}`.
#[derive(Clone)]
pub struct WarpedChart {
    pub chart: MetricChart,
    /// `f(r)` lifted to the chart, when the warping function provides it.
    pub potential: Option<ScalarField>,
    pub warping: Arc<dyn WarpingFunction>,
    pub fiber: FiberGeometry,
    pub window: (f64, f64),
}

impl fmt::Debug for WarpedChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedChart")
            .field("chart", &self.chart)
            .field("fiber", &self.fiber.label())
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

impl WarpedChart {
    pub fn n(&self) -> usize {
        self.chart.dim()
    }
}

pub fn warped_chart(warping: Arc<dyn WarpingFunction>, fiber: &FiberGeometry, window: (f64, f64)) -> Result<WarpedChart> {
    fiber.require_tensors()?;
    let (lo, hi) = window;
    let (dlo, dhi) = warping.domain();
    if !(lo < hi) || lo < dlo || hi > dhi {
        return Err(Error::Config(format!("chart window [{lo}, {hi}] not inside warping domain [{dlo}, {dhi}]")));
    }
    const PROBES: usize = 512;
    for i in 0..=PROBES {
        let r = lo + (hi - lo) * i as f64 / PROBES as f64;
        let phi = warping.sample(r).phi;
        if !(phi > 0.0) {
            return Err(Error::SingularWindow { lo, hi });
        }
    }
    let m = fiber.fiber_dim();
    let w = fiber.chart_half_width();
    let mut domain = vec![(lo, hi)];
    domain.extend(std::iter::repeat_n((-w, w), m));

    let fib = fiber.clone();
    let warp = Arc::clone(&warping);
    let chart = MetricChart::new(domain, move |x| {
        let phi = warp.sample(x[0]).phi;
        let gbar = fib.coordinate_metric_unchecked(&x[1..]);
        let mut g = DMatrix::zeros(m + 1, m + 1);
        g[(0, 0)] = 1.0;
        g.view_mut((1, 1), (m, m)).copy_from(&(gbar * (phi * phi)));
        g
    })?;
    let potential = warping.potential(0.5 * (lo + hi)).map(|_| {
        let warp = Arc::clone(&warping);
        ScalarField::new(move |x| warp.potential(x[0]).unwrap_or(f64::NAN))
    });
    Ok(WarpedChart {
        chart,
        potential,
        warping,
        fiber: fiber.clone(),
        window,
    })
}

/// Chart realizing `dr^2 + (f')^2 gbar` for a solved profile, with its
/// potential.
pub fn build_chart(profile: &SolitonProfile, fiber: &FiberGeometry, window: (f64, f64)) -> Result<WarpedChart> {
    check_n(fiber, profile.params().n)?;
    let interp = ProfileInterpolant::new(profile)?;
    warped_chart(Arc::new(interp), fiber, window)
}

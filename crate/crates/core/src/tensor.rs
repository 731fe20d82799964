//! Finite-difference Riemannian geometry on coordinate charts.
//!
//! Everything here works from evaluable metric components `g_ij(x)` (and scalar
//! fields) with second-order central differences and a caller-supplied step
//! `h`. No closed forms are used, so these routines serve as the oracle
//! against the warped-product formulas.
//!
//! Curvature convention: `R_ijkl` is fully covariant with
//! `R_ijkl = K (g_ik g_jl - g_il g_jk)` on a space form of sectional curvature
//! `K`, `R_ik = g^jl R_jilk` and `R = g^ik R_ik`. The unit 2-sphere has `R = 2`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Coordinate metric `g_ij(x)` on a box in `R^n`.
#[derive(Clone)]
pub struct MetricChart {
    dim: usize,
    domain: Vec<(f64, f64)>,
    metric: Arc<MetricFn>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl MetricChart {
    pub fn new<F>(domain: Vec<(f64, f64)>, metric: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let dim = domain.len();
        if dim < 2 {
            return Err(Error::Dimension(format!("chart dimension {dim} < 2")));
        }
        if let Some((i, _)) = domain
            .iter()
            .enumerate()
            .find(|(_, (lo, hi))| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::Config(format!("empty or non-finite domain interval for coordinate {i}")));
        }
        Ok(Self {
            dim,
            domain,
            metric: Arc::new(metric),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Raw metric components; no domain or definiteness checks.
    pub fn metric_raw(&self, x: &[f64]) -> DMatrix<f64> {
        (self.metric)(x)
    }

    /// Metric at `x`, checked for shape, symmetry and positive definiteness.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_margin(x, 0.0)?;
        let g = self.metric_raw(x);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "metric returned {}x{} for a {}-dimensional chart",
                g.nrows(),
                g.ncols(),
                self.dim
            )));
        }
        let scale = g.amax().max(1.0);
        for i in 0..self.dim {
            for j in 0..i {
                if (g[(i, j)] - g[(j, i)]).abs() > 1e-14 * scale {
                    return Err(Error::Degenerate(x.to_vec()));
                }
            }
        }
        if Cholesky::new(g.clone()).is_none() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(x.to_vec()));
        }
        Ok(g)
    }

    /// Fails unless `x` lies in the domain box with `margin` to spare in every
    /// coordinate.
    pub fn check_margin(&self, x: &[f64], margin: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                x.len(),
                self.dim
            )));
        }
        for (coord, (&value, &(lo, hi))) in x.iter().zip(&self.domain).enumerate() {
            if !(value - lo >= margin && hi - value >= margin) {
                return Err(Error::BoundaryMargin {
                    coord,
                    value,
                    margin,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// Scalar function on a chart (the potential `f`, or any test field).
#[derive(Clone)]
pub struct ScalarField(Arc<ScalarFn>);

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

impl ScalarField {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(value))
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

/// Dense `n x n x n` array.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Dense `n x n x n x n` array, used for fully covariant 4-tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Max-norm of the componentwise difference.
    pub fn max_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.dim, other.dim, "tensor dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Full contraction `T_ijkl T^ijkl` with the inverse metric.
    pub fn norm_sq(&self, ginv: &DMatrix<f64>) -> f64 {
        let n = self.dim;
        // raise all four indices one at a time
        let mut raised = self.clone();
        for slot in 0..4 {
            let mut next = Tensor4::zeros(n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut s = 0.0;
                            for m in 0..n {
                                let v = match slot {
                                    0 => raised.get(m, b, c, d) * ginv[(a, m)],
                                    1 => raised.get(a, m, c, d) * ginv[(b, m)],
                                    2 => raised.get(a, b, m, d) * ginv[(c, m)],
                                    _ => raised.get(a, b, c, m) * ginv[(d, m)],
                                };
                                s += v;
                            }
                            next.set(a, b, c, d, s);
                        }
                    }
                }
            }
            raised = next;
        }
        self.data.iter().zip(&raised.data).map(|(a, b)| a * b).sum()
    }

    /// Components in the frame `e_a = sum_i frame[(i, a)] d_i`.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Tensor4 {
        let n = self.dim;
        let mut cur = self.clone();
        for slot in 0..4 {
            let mut next = Tensor4::zeros(n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut s = 0.0;
                            for m in 0..n {
                                s += match slot {
                                    0 => cur.get(m, b, c, d) * frame[(m, a)],
                                    1 => cur.get(a, m, c, d) * frame[(m, b)],
                                    2 => cur.get(a, b, m, d) * frame[(m, c)],
                                    _ => cur.get(a, b, c, m) * frame[(m, d)],
                                };
                            }
                            next.set(a, b, c, d, s);
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

/// Curvature data at one point of a chart.
#[derive(Clone, Debug)]
pub struct CurvatureAtPoint {
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// `christoffel.get(k, i, j) = Gamma^k_ij`.
    pub christoffel: Tensor3,
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub weyl: Option<Tensor4>,
}

/// Metric with its first and second coordinate derivatives at a point.
struct MetricJet {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    /// `dg[k] = d_k g`
    dg: Vec<DMatrix<f64>>,
    /// `ddg[k * n + l] = d_k d_l g`, only filled when requested
    ddg: Vec<DMatrix<f64>>,
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn invert_spd(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    Cholesky::new(g.clone())
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Degenerate(x.to_vec()))
}

fn metric_jet(chart: &MetricChart, x: &[f64], h: f64, second: bool) -> Result<MetricJet> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let n = chart.dim();
    let g = chart.metric_at(x)?;
    let ginv = invert_spd(&g, x)?;
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let gp = chart.metric_raw(&shifted(x, &[(k, h)]));
        let gm = chart.metric_raw(&shifted(x, &[(k, -h)]));
        dg.push((&gp - &gm) / (2.0 * h));
        plus.push(gp);
        minus.push(gm);
    }
    let mut ddg = Vec::new();
    if second {
        ddg = vec![DMatrix::zeros(n, n); n * n];
        for k in 0..n {
            ddg[k * n + k] = (&plus[k] - &g * 2.0 + &minus[k]) / (h * h);
            for l in 0..k {
                let gpp = chart.metric_raw(&shifted(x, &[(k, h), (l, h)]));
                let gpm = chart.metric_raw(&shifted(x, &[(k, h), (l, -h)]));
                let gmp = chart.metric_raw(&shifted(x, &[(k, -h), (l, h)]));
                let gmm = chart.metric_raw(&shifted(x, &[(k, -h), (l, -h)]));
                let mixed = (gpp - gpm - gmp + gmm) / (4.0 * h * h);
                ddg[l * n + k] = mixed.clone();
                ddg[k * n + l] = mixed;
            }
        }
    }
    Ok(MetricJet { g, ginv, dg, ddg })
}

/// Christoffel symbols of the first kind, `Gamma_{l,ij}`, stored as `(l, i, j)`.
fn christoffel_first_kind(jet: &MetricJet) -> Tensor3 {
    let n = jet.g.nrows();
    let mut out = Tensor3::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
                out.set(l, i, j, v);
                out.set(l, j, i, v);
            }
        }
    }
    out
}

fn raise_first(first: &Tensor3, ginv: &DMatrix<f64>) -> Tensor3 {
    let n = first.dim();
    let mut out = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|l| ginv[(k, l)] * first.get(l, i, j)).sum();
                out.set(k, i, j, v);
                out.set(k, j, i, v);
            }
        }
    }
    out
}

/// `Gamma^k_ij` at `x` by central differences. Requires a margin of `2h`.
pub fn christoffel(chart: &MetricChart, x: &[f64], h: f64) -> Result<Tensor3> {
    chart.check_margin(x, 2.0 * h)?;
    let jet = metric_jet(chart, x, h, false)?;
    Ok(raise_first(&christoffel_first_kind(&jet), &jet.ginv))
}

/// Riemann, Ricci and scalar curvature at `x`. Requires a margin of `4h`.
///
/// `weyl` is left empty; see [`weyl`] and [`curvature_with_weyl`].
pub fn riemann_ricci_scalar(chart: &MetricChart, x: &[f64], h: f64) -> Result<CurvatureAtPoint> {
    chart.check_margin(x, 4.0 * h)?;
    let jet = metric_jet(chart, x, h, true)?;
    let n = chart.dim();
    let first = christoffel_first_kind(&jet);
    let second = raise_first(&first, &jet.ginv);
    let dd = |a: usize, b: usize, i: usize, j: usize| jet.ddg[a * n + b][(i, j)];

    let mut riemann = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let deriv = 0.5 * (dd(j, k, i, l) + dd(i, l, j, k) - dd(j, l, i, k) - dd(i, k, j, l));
                    let mut quad = 0.0;
                    for p in 0..n {
                        quad += first.get(p, j, k) * second.get(p, i, l) - first.get(p, j, l) * second.get(p, i, k);
                    }
                    riemann.set(i, j, k, l, deriv + quad);
                }
            }
        }
    }
    let ricci = ricci_from(&riemann, &jet.ginv);
    let scalar = trace(&ricci, &jet.ginv);
    Ok(CurvatureAtPoint {
        metric: jet.g,
        inverse: jet.ginv,
        christoffel: second,
        riemann,
        ricci,
        scalar,
        weyl: None,
    })
}

/// Like [`riemann_ricci_scalar`] with the Weyl tensor filled in (`n >= 3`).
pub fn curvature_with_weyl(chart: &MetricChart, x: &[f64], h: f64) -> Result<CurvatureAtPoint> {
    let mut curv = riemann_ricci_scalar(chart, x, h)?;
    let w = weyl(&curv, &curv.metric)?;
    curv.weyl = Some(w);
    Ok(curv)
}

/// `R_ik = g^jl R_jilk`.
pub fn ricci_from(riemann: &Tensor4, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = riemann.dim();
    let mut ric = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for l in 0..n {
                    s += ginv[(j, l)] * riemann.get(j, i, l, k);
                }
            }
            ric[(i, k)] = s;
        }
    }
    ric
}

pub fn trace(a: &DMatrix<f64>, ginv: &DMatrix<f64>) -> f64 {
    a.component_mul(ginv).sum()
}

/// Kulkarni-Nomizu product
/// `(A o B)_ijkl = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il`.
pub fn kulkarni_nomizu(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Tensor4 {
    let n = a.nrows();
    let mut out = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = a[(i, k)] * b[(j, l)] + a[(j, l)] * b[(i, k)] - a[(i, l)] * b[(j, k)] - a[(j, k)] * b[(i, l)];
                    out.set(i, j, k, l, v);
                }
            }
        }
    }
    out
}

/// Weyl tensor from Riemann, Ricci and scalar curvature:
/// `W = Rm - (Ric o g)/(n-2) + R (g o g)/(2(n-1)(n-2))`.
pub fn weyl_from_parts(riemann: &Tensor4, ricci: &DMatrix<f64>, scalar: f64, g: &DMatrix<f64>) -> Result<Tensor4> {
    let n = riemann.dim();
    if n < 3 {
        return Err(Error::Dimension(format!("Weyl tensor needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let ric_g = kulkarni_nomizu(ricci, g);
    let g_g = kulkarni_nomizu(g, g);
    let c1 = 1.0 / (nf - 2.0);
    let c2 = scalar / (2.0 * (nf - 1.0) * (nf - 2.0));
    let mut w = Tensor4::zeros(n);
    for (i, out) in w.data.iter_mut().enumerate() {
        *out = riemann.data[i] - c1 * ric_g.data[i] + c2 * g_g.data[i];
    }
    Ok(w)
}

/// Weyl tensor of populated curvature data.
pub fn weyl(curv: &CurvatureAtPoint, g: &DMatrix<f64>) -> Result<Tensor4> {
    weyl_from_parts(&curv.riemann, &curv.ricci, curv.scalar, g)
}

/// Max residual of the algebraic Riemann symmetries: antisymmetry in each
/// pair, pair exchange and the first Bianchi identity.
pub fn riemann_symmetry_residual(rm: &Tensor4) -> f64 {
    let n = rm.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = rm.get(i, j, k, l);
                    worst = worst
                        .max((v + rm.get(j, i, k, l)).abs())
                        .max((v + rm.get(i, j, l, k)).abs())
                        .max((v - rm.get(k, l, i, j)).abs())
                        .max((v + rm.get(i, k, l, j) + rm.get(i, l, j, k)).abs());
                }
            }
        }
    }
    worst
}

/// Largest component of any single contraction of `w` with `g^{-1}`.
pub fn trace_residual(w: &Tensor4, ginv: &DMatrix<f64>) -> f64 {
    let n = w.dim();
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut worst: f64 = 0.0;
    for &(s, t) in &pairs {
        for a in 0..n {
            for b in 0..n {
                let mut sum = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        let mut idx = [0usize; 4];
                        idx[s] = p;
                        idx[t] = q;
                        let free: Vec<usize> = (0..4).filter(|&u| u != s && u != t).collect();
                        idx[free[0]] = a;
                        idx[free[1]] = b;
                        sum += ginv[(p, q)] * w.get(idx[0], idx[1], idx[2], idx[3]);
                    }
                }
                worst = worst.max(sum.abs());
            }
        }
    }
    worst
}

/// First derivatives, gradient and Hessian of a scalar field.
#[derive(Clone, Debug)]
pub struct GradientHessian {
    /// Covector `d_i f`.
    pub differential: DVector<f64>,
    /// Vector `g^ij d_j f`.
    pub gradient: DVector<f64>,
    /// `|grad f|^2 = g^ij d_i f d_j f`.
    pub norm_sq: f64,
    /// `Hess_ij = d_i d_j f - Gamma^k_ij d_k f`.
    pub hessian: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
}

fn field_differential(field: &ScalarField, x: &[f64], h: f64) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|k| (field.value_at(&shifted(x, &[(k, h)])) - field.value_at(&shifted(x, &[(k, -h)]))) / (2.0 * h)),
    )
}

/// Gradient and Hessian at `x`. Requires a margin of `4h`.
pub fn gradient_and_hessian(chart: &MetricChart, field: &ScalarField, x: &[f64], h: f64) -> Result<GradientHessian> {
    chart.check_margin(x, 4.0 * h)?;
    let n = chart.dim();
    let jet = metric_jet(chart, x, h, false)?;
    let gamma = raise_first(&christoffel_first_kind(&jet), &jet.ginv);
    let f0 = field.value_at(x);
    let df = field_differential(field, x, h);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = field.value_at(&shifted(x, &[(i, h)]));
        let fm = field.value_at(&shifted(x, &[(i, -h)]));
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let fpp = field.value_at(&shifted(x, &[(i, h), (j, h)]));
            let fpm = field.value_at(&shifted(x, &[(i, h), (j, -h)]));
            let fmp = field.value_at(&shifted(x, &[(i, -h), (j, h)]));
            let fmm = field.value_at(&shifted(x, &[(i, -h), (j, -h)]));
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let corr: f64 = (0..n).map(|k| gamma.get(k, i, j) * df[k]).sum();
            hess[(i, j)] -= corr;
        }
    }
    let gradient = &jet.ginv * &df;
    let norm_sq = df.dot(&gradient);
    Ok(GradientHessian {
        differential: df,
        gradient,
        norm_sq,
        hessian: hess,
        metric: jet.g,
        inverse: jet.ginv,
    })
}

/// `d_k |grad f|^2` by central differences of the finite-difference
/// `|grad f|^2`. Requires a margin of `4h`.
pub fn grad_norm_sq_differential(chart: &MetricChart, field: &ScalarField, x: &[f64], h: f64) -> Result<DVector<f64>> {
    chart.check_margin(x, 4.0 * h)?;
    let n = chart.dim();
    let norm_at = |y: &[f64]| -> Result<f64> {
        let g = chart.metric_raw(y);
        let ginv = invert_spd(&g, y)?;
        let df = field_differential(field, y, h);
        Ok(df.dot(&(&ginv * &df)))
    };
    let mut out = DVector::zeros(n);
    for k in 0..n {
        out[k] = (norm_at(&shifted(x, &[(k, h)]))? - norm_at(&shifted(x, &[(k, -h)]))?) / (2.0 * h);
    }
    Ok(out)
}

/// Columns of the returned matrix form a `g`-orthonormal frame
/// (`F^T g F = I`), obtained from the Cholesky factor `g = L L^T` as `L^{-T}`.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = Cholesky::new(g.clone())?;
    let l = chol.l();
    let linv = l.try_inverse()?;
    Some(linv.transpose())
}

/// Max-norm of a symmetric 2-tensor in a `g`-orthonormal frame.
pub fn frame_max_norm(t: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<f64> {
    let f = orthonormal_frame(g)?;
    Some((f.transpose() * t * &f).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn euclidean(n: usize) -> MetricChart {
        MetricChart::new(vec![(-1.0, 1.0); n], move |_| DMatrix::identity(n, n)).unwrap()
    }

    fn polar() -> MetricChart {
        MetricChart::new(vec![(1.0, 3.0), (-1.0, 1.0)], |x| DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x[0] * x[0]]))).unwrap()
    }

    fn sphere() -> MetricChart {
        MetricChart::new(vec![(0.3, 1.3), (-1.0, 1.0)], |x| DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x[0].sin().powi(2)]))).unwrap()
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let g = christoffel(&euclidean(3), &[0.1, 0.2, -0.3], 1e-3).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn polar_christoffels() {
        let g = christoffel(&polar(), &[2.0, 0.0], 1e-3).unwrap();
        assert!((g.get(0, 1, 1) + 2.0).abs() < 1e-9);
        assert!((g.get(1, 0, 1) - 0.5).abs() < 1e-9);
        assert!((g.get(1, 1, 0) - 0.5).abs() < 1e-9);
        assert!(g.get(0, 0, 0).abs() < 1e-12 && g.get(1, 1, 1).abs() < 1e-12 && g.get(0, 0, 1).abs() < 1e-12);
    }

    #[test]
    fn sphere_christoffel_and_scalar() {
        let g = christoffel(&sphere(), &[FRAC_PI_4, 0.0], 1e-3).unwrap();
        assert!((g.get(0, 1, 1) + 0.5).abs() < 1e-6);
        let c = riemann_ricci_scalar(&sphere(), &[FRAC_PI_4, 0.0], 1e-3).unwrap();
        assert!((c.scalar - 2.0).abs() < 1e-5, "R = {}", c.scalar);
        // positive convention: R_0101 = K det g
        assert!((c.riemann.get(0, 1, 0, 1) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn euclidean_curvature_vanishes() {
        let c = curvature_with_weyl(&euclidean(4), &[0.0; 4], 1e-3).unwrap();
        assert_eq!(c.riemann.max_abs(), 0.0);
        assert_eq!(c.scalar, 0.0);
        assert_eq!(c.weyl.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn flat_space_as_warped_product_is_flat() {
        // dr^2 + r^2 (round S^2 in stereographic coordinates)
        let chart = MetricChart::new(vec![(1.0, 2.0), (-0.3, 0.3), (-0.3, 0.3)], |x| {
            let s = 4.0 / (1.0 + x[1] * x[1] + x[2] * x[2]).powi(2) * x[0] * x[0];
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, s, s]))
        })
        .unwrap();
        let c = riemann_ricci_scalar(&chart, &[1.5, 0.1, -0.05], 1e-3).unwrap();
        assert!(c.scalar.abs() < 1e-5, "R = {}", c.scalar);
    }

    #[test]
    fn boundary_margin_is_refused() {
        let err = riemann_ricci_scalar(&polar(), &[1.002, 0.0], 1e-3).unwrap_err();
        assert!(matches!(err, Error::BoundaryMargin { coord: 0, .. }));
        assert!(christoffel(&polar(), &[1.0021, 0.0], 1e-3).is_ok());
    }

    #[test]
    fn degenerate_metric_is_refused() {
        let chart = MetricChart::new(vec![(-1.0, 1.0); 2], |_| DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(christoffel(&chart, &[0.0, 0.0], 1e-3), Err(Error::Degenerate(_))));
        let chart = MetricChart::new(vec![(-1.0, 1.0); 2], |_| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(matches!(riemann_ricci_scalar(&chart, &[0.0, 0.0], 1e-3), Err(Error::Degenerate(_))));
    }

    #[test]
    fn weyl_needs_dimension_three() {
        let c = riemann_ricci_scalar(&sphere(), &[0.8, 0.0], 1e-3).unwrap();
        assert!(matches!(weyl(&c, &c.metric), Err(Error::Dimension(_))));
    }

    #[test]
    fn flat_hessian_of_quadratic() {
        let chart = euclidean(3);
        let f = ScalarField::new(|x| 0.5 * x.iter().map(|v| v * v).sum::<f64>());
        let x = [0.2, -0.1, 0.3];
        let gh = gradient_and_hessian(&chart, &f, &x, 1e-3).unwrap();
        assert!((gh.hessian.clone() - DMatrix::identity(3, 3)).amax() < 1e-8);
        for (g, xk) in gh.gradient.iter().zip(x) {
            assert!((g - xk).abs() < 1e-9);
        }
    }

    #[test]
    fn polar_hessian_of_radius() {
        let f = ScalarField::new(|x| x[0]);
        let gh = gradient_and_hessian(&polar(), &f, &[2.0, 0.0], 1e-3).unwrap();
        assert!((gh.hessian[(1, 1)] - 2.0).abs() < 1e-8);
        assert!(gh.hessian[(0, 0)].abs() < 1e-8);
        assert!((gh.norm_sq - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthonormal_frame_diagonalizes_metric() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let f = orthonormal_frame(&g).unwrap();
        assert!((f.transpose() * &g * &f - DMatrix::identity(3, 3)).amax() < 1e-14);
    }
}

use serde::{Deserialize, Serialize};

use super::SolitonParams;
use crate::error::{Error, Result};

/// Odd power series `phi(r) = sum c_k r^k` of a profile closing smoothly at
/// a critical point of `f` (placed at `r = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginSeries {
    /// `coefficients[k]` multiplies `r^k`; even entries are zero.
    pub coefficients: Vec<f64>,
    pub kappa: f64,
}

fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn derivative(a: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = a.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
    d.push(0.0);
    d
}

/// Coefficients through `r^order` (odd terms only).
///
/// With `c_1 = sqrt(kappa)` fixed by the `r^0` balance, the `r^m` coefficient
/// of `2(n-1) phi phi'' + phi^2 (phi' + rho) + (n-1)(n-2) phi'^2 - Rbar`
/// is linear in `c_{m+1}` with slope `2(n-1)(m+1)(m+n-2) c_1`, which gives
/// each new term from the lower ones.
pub fn series_origin(params: &SolitonParams, kappa: f64, order: usize) -> Result<OriginSeries> {
    params.validate()?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::NoSmoothClosing(kappa));
    }
    if order < 3 {
        return Err(Error::Config(format!("series order must be >= 3, got {order}")));
    }
    let n = params.nf();
    let expected = kappa * (n - 1.0) * (n - 2.0);
    if (params.rbar - expected).abs() > 1e-12 * expected.max(1.0) {
        return Err(Error::Config(format!(
            "smooth closing needs a round fiber with Rbar = kappa (n-1)(n-2) = {expected}, got Rbar = {}",
            params.rbar
        )));
    }
    let len = order + 2;
    let mut c = vec![0.0; len];
    c[1] = kappa.sqrt();
    let mut m = 2;
    while m < order {
        let d1 = derivative(&c);
        let d2 = derivative(&d1);
        let phi_phi2 = mul(&c, &d2, len);
        let phi_sq = mul(&c, &c, len);
        let mut d1_rho = d1.clone();
        d1_rho[0] += params.rho;
        let cubic = mul(&phi_sq, &d1_rho, len);
        let grad_sq = mul(&d1, &d1, len);
        let known = 2.0 * (n - 1.0) * phi_phi2[m] + cubic[m] + (n - 1.0) * (n - 2.0) * grad_sq[m];
        let mf = m as f64;
        c[m + 1] = -known / (2.0 * (n - 1.0) * (mf + 1.0) * (mf + n - 2.0) * c[1]);
        m += 2;
    }
    c.truncate(order + 1);
    Ok(OriginSeries { coefficients: c, kappa })
}

impl OriginSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `(phi, phi', phi'')` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
        for (k, &c) in self.coefficients.iter().enumerate().rev() {
            let kf = k as f64;
            v = v * r + c;
            if k >= 1 {
                d = d * r + kf * c;
            }
            if k >= 2 {
                dd = dd * r + kf * (kf - 1.0) * c;
            }
        }
        (v, d, dd)
    }

    /// Antiderivative of `phi` vanishing at 0.
    pub fn potential(&self, r: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, &c)| c * r.powi(k as i32 + 1) / (k as f64 + 1.0))
            .sum()
    }

    /// Root-ratio estimate `min |c_k / c_{k+2}|^{1/2}` of the radius of
    /// convergence; infinite when the series terminates.
    pub fn radius_estimate(&self) -> f64 {
        let c = &self.coefficients;
        let mut est = f64::INFINITY;
        let mut k = 1;
        while k + 2 < c.len() {
            if c[k + 2] != 0.0 && c[k] != 0.0 {
                est = est.min((c[k] / c[k + 2]).abs().sqrt());
            }
            k += 2;
        }
        est
    }

    /// Seed radius `tol^(1/order)` scaled by the radius estimate.
    pub fn seed_radius(&self, tol: f64) -> f64 {
        tol.powf(1.0 / self.order() as f64) * self.radius_estimate().min(1.0)
    }
}

use serde::{Deserialize, Serialize};

use super::classify::{classify, Classification};
use super::{ode_rhs, ProfileState, SolitonParams};
use crate::error::{Error, Result};
use crate::warped::{WarpingFunction, WarpingSample};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub f: f64,
    /// Scalar curvature `R = phi' + rho`.
    #[serde(rename = "R")]
    pub scalar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointKind {
    /// `phi` reached the critical-point threshold.
    CriticalPoint,
    BlowUp,
    /// The integration stopped at a prescribed `r` (or started there).
    IntegrationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub r: f64,
    pub kind: EndpointKind,
}

/// A solved warping profile on `[domain.0.r, domain.1.r]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile {
    params: SolitonParams,
    samples: Vec<ProfileSample>,
    domain: (Endpoint, Endpoint),
    classification: Classification,
    /// The profile was mirrored by `r -> -r, phi -> -phi` to make `phi > 0`.
    reflected: bool,
    /// Part of the domain was obtained integrating towards decreasing `r`.
    backward: bool,
    phi_min: f64,
}

impl SolitonProfile {
    /// Assembles a profile from samples ordered by increasing `r`.
    pub fn from_samples(
        params: SolitonParams,
        samples: Vec<ProfileSample>,
        kinds: (EndpointKind, EndpointKind),
        phi_min: f64,
    ) -> Result<Self> {
        params.validate()?;
        if samples.len() < 2 {
            return Err(Error::Input(format!("profile needs at least 2 samples, got {}", samples.len())));
        }
        for w in samples.windows(2) {
            if !(w[1].r > w[0].r) {
                return Err(Error::Input(format!("sample radii not strictly increasing at r = {}", w[1].r)));
            }
        }
        if let Some(s) = samples.iter().find(|s| ![s.r, s.phi, s.dphi, s.ddphi, s.f, s.scalar].iter().all(|v| v.is_finite())) {
            return Err(Error::Input(format!("non-finite sample at r = {}", s.r)));
        }
        let domain = (
            Endpoint { r: samples[0].r, kind: kinds.0 },
            Endpoint {
                r: samples[samples.len() - 1].r,
                kind: kinds.1,
            },
        );
        let mut profile = Self {
            params,
            samples,
            domain,
            classification: Classification::Undetermined,
            reflected: false,
            backward: false,
            phi_min,
        };
        profile.classification = classify(&profile)?.classification;
        Ok(profile)
    }

    /// Profile read back from tabulated `(r, phi, phi', phi'', f, R)` data
    /// with endpoint kinds inferred from `phi` at the ends.
    pub fn from_table(params: SolitonParams, samples: Vec<ProfileSample>, phi_min: f64) -> Result<Self> {
        let infer = |s: Option<&ProfileSample>| match s {
            Some(s) if s.phi.abs() <= 2.0 * phi_min => EndpointKind::CriticalPoint,
            _ => EndpointKind::IntegrationLimit,
        };
        let kinds = (infer(samples.first()), infer(samples.last()));
        Self::from_samples(params, samples, kinds, phi_min)
    }

    pub(crate) fn set_flags(&mut self, reflected: bool, backward: bool) {
        self.reflected = reflected;
        self.backward = backward;
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn domain(&self) -> (Endpoint, Endpoint) {
        self.domain
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn reflected(&self) -> bool {
        self.reflected
    }

    pub fn backward(&self) -> bool {
        self.backward
    }

    pub fn phi_min(&self) -> f64 {
        self.phi_min
    }

    /// Mean curvature `(n-1) phi'/phi` of the level set through a sample.
    pub fn mean_curvature(&self, s: &ProfileSample) -> f64 {
        (self.params.nf() - 1.0) * s.dphi / s.phi
    }

    /// Largest `|R - rho - phi'|` over the samples.
    pub fn scalar_identity_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.scalar - self.params.rho - s.dphi).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|phi'' - ode_rhs|` over samples with `phi != 0`.
    pub fn ode_residual(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.phi != 0.0)
            .map(|s| {
                let rhs = ode_rhs(&self.params, &ProfileState::new(s.r, s.phi, s.dphi)).unwrap_or(f64::NAN);
                (s.ddphi - rhs).abs()
            })
            .fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }

    /// `f` never decreases between consecutive samples with `phi > 0`, and
    /// rises over the whole profile. Near `phi = 0` single increments can be
    /// below the resolution of `f`.
    pub fn potential_increasing(&self) -> bool {
        let (first, last) = (&self.samples[0], &self.samples[self.samples.len() - 1]);
        last.f > first.f
            && self
                .samples
                .windows(2)
                .filter(|w| w[0].phi > 0.0 && w[1].phi > 0.0)
                .all(|w| w[1].f >= w[0].f)
    }

    pub fn interpolant(&self) -> Result<ProfileInterpolant> {
        ProfileInterpolant::new(self)
    }
}

/// Quintic on `[0, 1]` matching value, first and second derivative (already
/// scaled by the interval length) at both ends, in monomial form.
fn quintic(y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64) -> [f64; 6] {
    let dy = y1 - y0;
    [
        y0,
        d0,
        0.5 * s0,
        10.0 * dy - 6.0 * d0 - 4.0 * d1 - 1.5 * s0 + 0.5 * s1,
        -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 1.5 * s0 - s1,
        6.0 * dy - 3.0 * d0 - 3.0 * d1 - 0.5 * s0 + 0.5 * s1,
    ]
}

fn poly_jet(a: &[f64; 6], t: f64) -> (f64, f64, f64) {
    let v = a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * (a[4] + t * a[5]))));
    let d = a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * (4.0 * a[4] + t * 5.0 * a[5])));
    let dd = 2.0 * a[2] + t * (6.0 * a[3] + t * (12.0 * a[4] + t * 20.0 * a[5]));
    (v, d, dd)
}

/// Piecewise quintic Hermite interpolation of a profile: `phi` from
/// `(phi, phi', phi'')` and `f` from `(f, phi, phi')` at the samples. The
/// result is `C^2` across samples.
#[derive(Clone, Debug)]
pub struct ProfileInterpolant {
    knots: Vec<f64>,
    phi: Vec<[f64; 6]>,
    f: Vec<[f64; 6]>,
}

impl ProfileInterpolant {
    pub fn new(profile: &SolitonProfile) -> Result<Self> {
        let s = profile.samples();
        if s.len() < 2 {
            return Err(Error::Input("interpolation needs at least 2 samples".into()));
        }
        let mut phi = Vec::with_capacity(s.len() - 1);
        let mut f = Vec::with_capacity(s.len() - 1);
        for w in s.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let h = b.r - a.r;
            let h2 = h * h;
            phi.push(quintic(a.phi, h * a.dphi, h2 * a.ddphi, b.phi, h * b.dphi, h2 * b.ddphi));
            f.push(quintic(a.f, h * a.phi, h2 * a.dphi, b.f, h * b.phi, h2 * b.dphi));
        }
        Ok(Self {
            knots: s.iter().map(|s| s.r).collect(),
            phi,
            f,
        })
    }

    fn locate(&self, r: f64) -> (usize, f64, f64) {
        let last = self.knots.len() - 2;
        let i = self.knots.partition_point(|&k| k <= r).saturating_sub(1).min(last);
        let h = self.knots[i + 1] - self.knots[i];
        (i, (r - self.knots[i]) / h, h)
    }

    pub fn potential_at(&self, r: f64) -> f64 {
        let (i, t, _) = self.locate(r);
        poly_jet(&self.f[i], t).0
    }
}

impl WarpingFunction for ProfileInterpolant {
    fn sample(&self, r: f64) -> WarpingSample {
        let (i, t, h) = self.locate(r);
        let (v, d, dd) = poly_jet(&self.phi[i], t);
        WarpingSample::new(r, v, d / h, dd / (h * h))
    }

    fn potential(&self, r: f64) -> Option<f64> {
        Some(self.potential_at(r))
    }

    fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }
}

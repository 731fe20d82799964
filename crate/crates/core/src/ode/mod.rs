//! The profile ODE
//! `2(n-1) phi phi'' = Rbar - phi^2 (phi' + rho) - (n-1)(n-2) phi'^2`
//! for the warping function `phi = f'`, with `R = phi' + rho`.

mod classify;
mod integrate;
mod profile;
mod series;

pub use classify::{classify, Classification, ClassificationReport};
pub use integrate::{integrate, Direction, Limits, Start};
pub use profile::{Endpoint, EndpointKind, ProfileInterpolant, ProfileSample, SolitonProfile};
pub use series::{series_origin, OriginSeries};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension `n`, soliton constant `rho` and fiber scalar curvature `Rbar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub n: usize,
    pub rho: f64,
    #[serde(rename = "Rbar")]
    pub rbar: f64,
}

impl SolitonParams {
    pub fn new(n: usize, rho: f64, rbar: f64) -> Result<Self> {
        let p = Self { n, rho, rbar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Config(format!("n must be >= 3, got {}", self.n)));
        }
        if !self.rho.is_finite() || !self.rbar.is_finite() {
            return Err(Error::Config("rho and Rbar must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn nf(&self) -> f64 {
        self.n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub r: f64,
    pub phi: f64,
    /// `phi'`
    pub p: f64,
}

impl ProfileState {
    pub fn new(r: f64, phi: f64, p: f64) -> Self {
        Self { r, phi, p }
    }
}

fn rhs_unchecked(params: &SolitonParams, phi: f64, p: f64) -> f64 {
    let n = params.nf();
    (params.rbar - phi * phi * (p + params.rho) - (n - 1.0) * (n - 2.0) * p * p) / (2.0 * (n - 1.0) * phi)
}

/// `phi''` at a nonsingular state.
pub fn ode_rhs(params: &SolitonParams, s: &ProfileState) -> Result<f64> {
    if s.phi == 0.0 {
        return Err(Error::SingularState(s.r));
    }
    Ok(rhs_unchecked(params, s.phi, s.p))
}

/// Checks `(Rbar <= 0 and p + rho >= 0) => phi'' <= 0` at a state with
/// `phi > 0`. States with `phi <= 0` get no certificate.
pub fn concavity_certificate(params: &SolitonParams, s: &ProfileState) -> bool {
    if !(s.phi > 0.0) {
        return false;
    }
    if params.rbar <= 0.0 && s.p + params.rho >= 0.0 {
        rhs_unchecked(params, s.phi, s.p) <= 0.0
    } else {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_examples() {
        for n in 3..8 {
            let nf = n as f64;
            let p = SolitonParams::new(n, -1.0, (nf - 1.0) * (nf - 2.0)).unwrap();
            for r in [0.1, 1.0, 9.0] {
                assert_eq!(ode_rhs(&p, &ProfileState::new(r, r, 1.0)).unwrap(), 0.0);
            }
        }
        let p = SolitonParams::new(3, 1.0, 4.0).unwrap();
        assert_eq!(ode_rhs(&p, &ProfileState::new(0.0, 2.0, 0.0)).unwrap(), 0.0);
        let p = SolitonParams::new(3, 0.0, 2.0).unwrap();
        assert_eq!(ode_rhs(&p, &ProfileState::new(0.0, 1.0, 1.0)).unwrap(), -0.25);
        assert!(matches!(ode_rhs(&p, &ProfileState::new(3.0, 0.0, 1.0)), Err(Error::SingularState(r)) if r == 3.0));
    }

    #[test]
    fn params_validation() {
        assert!(SolitonParams::new(2, 0.0, 0.0).is_err());
        assert!(SolitonParams::new(3, f64::NAN, 0.0).is_err());
        assert!(SolitonParams::new(3, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn concavity_examples() {
        for n in 3..6 {
            let nf = n as f64;
            let p = SolitonParams::new(n, 0.0, 0.0).unwrap();
            let s = ProfileState::new(0.0, 5.0, 0.3);
            let expected = (-25.0 * 0.3 - (nf - 1.0) * (nf - 2.0) * 0.09) / (2.0 * (nf - 1.0) * 5.0);
            assert!((ode_rhs(&p, &s).unwrap() - expected).abs() < 1e-15);
            assert!(concavity_certificate(&p, &s));
            let p = SolitonParams::new(n, 1.0, -1.0).unwrap();
            let s = ProfileState::new(0.0, 1.0, 0.0);
            // both Rbar and phi^2 rho contribute -1 to the numerator
            assert_eq!(ode_rhs(&p, &s).unwrap(), -1.0 / (nf - 1.0));
            assert!(concavity_certificate(&p, &s));
        }
        let p = SolitonParams::new(3, 0.0, 0.0).unwrap();
        assert!(!concavity_certificate(&p, &ProfileState::new(0.0, -1.0, 0.0)));
    }
}

use serde::{Deserialize, Serialize};

use super::profile::{EndpointKind, SolitonProfile};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// `f` has exactly one critical point, at an end of the domain.
    RotationallySymmetric,
    /// No critical point and `phi` stays away from zero.
    CylinderType,
    Undetermined,
}

/// Slopes below this at an open end count as heading towards `phi = 0`.
const SLOPE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classification: Classification,
    pub critical_points: Vec<f64>,
    pub domain: [f64; 2],
    pub endpoints: [EndpointKind; 2],
    /// Two critical points were detected: a compact soliton, which cannot be
    /// nontrivial. Never accepted as a classification.
    pub inconsistent: bool,
    pub min_phi: f64,
    pub scalar_min: f64,
    /// Minimum of `Ric(d_r, d_r) = -(n-1) phi''/phi` over regular samples.
    pub radial_ricci_min: f64,
    /// Minimum of the tangential Ricci eigenvalue
    /// `(Rbar/(n-1) - (n-2) phi'^2 - phi phi'')/phi^2`, valid for Einstein fibers.
    pub tangential_ricci_min: f64,
}

pub fn classify(profile: &SolitonProfile) -> Result<ClassificationReport> {
    let s = profile.samples();
    if s.is_empty() {
        return Err(Error::Input("empty profile".into()));
    }
    let params = profile.params();
    let n = params.nf();
    let (lo, hi) = profile.domain();
    let critical_points: Vec<f64> = [lo, hi]
        .iter()
        .filter(|e| e.kind == EndpointKind::CriticalPoint)
        .map(|e| e.r)
        .collect();
    let min_phi = s.iter().map(|s| s.phi).fold(f64::INFINITY, f64::min);
    let scalar_min = s.iter().map(|s| s.scalar).fold(f64::INFINITY, f64::min);
    let regular = s.iter().filter(|q| q.phi > profile.phi_min());
    let (mut radial_ricci_min, mut tangential_ricci_min) = (f64::INFINITY, f64::INFINITY);
    for q in regular {
        radial_ricci_min = radial_ricci_min.min(-(n - 1.0) * q.ddphi / q.phi);
        let t = (params.rbar / (n - 1.0) - (n - 2.0) * q.dphi * q.dphi - q.phi * q.ddphi) / (q.phi * q.phi);
        tangential_ricci_min = tangential_ricci_min.min(t);
    }

    let inconsistent = critical_points.len() == 2;
    let interior_positive = s[1..s.len() - 1].iter().all(|q| q.phi > 0.0);
    let open_end_ok = |kind: EndpointKind, outward_slope: f64| match kind {
        EndpointKind::CriticalPoint => false,
        EndpointKind::BlowUp => true,
        EndpointKind::IntegrationLimit => outward_slope >= -SLOPE_TOL,
    };
    let classification = match critical_points.len() {
        1 if interior_positive => Classification::RotationallySymmetric,
        0 if min_phi > 10.0 * profile.phi_min()
            && open_end_ok(lo.kind, -s[0].dphi)
            && open_end_ok(hi.kind, s[s.len() - 1].dphi) =>
        {
            Classification::CylinderType
        }
        _ => Classification::Undetermined,
    };
    Ok(ClassificationReport {
        classification,
        critical_points,
        domain: [lo.r, hi.r],
        endpoints: [lo.kind, hi.kind],
        inconsistent,
        min_phi,
        scalar_min,
        radial_ricci_min,
        tangential_ricci_min,
    })
}

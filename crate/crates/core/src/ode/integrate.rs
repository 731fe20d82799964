use serde::{Deserialize, Serialize};

use super::profile::{EndpointKind, ProfileSample, SolitonProfile};
use super::series::series_origin;
use super::{rhs_unchecked, ProfileState, SolitonParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Start {
    /// Regular initial state `(r0, phi0, phi'0)`.
    State(ProfileState),
    /// Smooth closing at a critical point of `f` placed at `r = 0`, seeded
    /// from the origin series of the given order.
    Origin {
        kappa: f64,
        order: usize,
        seed_radius: Option<f64>,
    },
}

impl Start {
    pub fn origin(kappa: f64) -> Self {
        Start::Origin {
            kappa,
            order: 7,
            seed_radius: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub r_max: f64,
    pub r_min: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub dphi_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// Emit samples on a uniform grid of this spacing (via dense output)
    /// instead of at the accepted steps.
    pub output_step: Option<f64>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            r_max: 10.0,
            r_min: -10.0,
            phi_min: 1e-8,
            phi_max: 1e8,
            dphi_max: 1e8,
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.05,
            min_step: 1e-14,
            max_steps: 1_000_000,
            output_step: None,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("max_step", self.max_step),
            ("min_step", self.min_step),
            ("phi_min", self.phi_min),
            ("dphi_max", self.dphi_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.phi_max > self.phi_min) {
            return Err(Error::Config("phi_max must exceed phi_min".into()));
        }
        if !(self.r_min < self.r_max) || !self.r_min.is_finite() || !self.r_max.is_finite() {
            return Err(Error::Config(format!("need finite r_min < r_max, got [{}, {}]", self.r_min, self.r_max)));
        }
        if self.min_step > self.max_step {
            return Err(Error::Config("min_step exceeds max_step".into()));
        }
        if let Some(dr) = self.output_step {
            if !(dr > 0.0 && dr.is_finite()) {
                return Err(Error::Config(format!("output_step must be positive, got {dr}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type State = [f64; 3];

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += c * k[i];
        }
    }
    out
}

/// Dense output of one accepted step.
struct Dense {
    r0: f64,
    h: f64,
    rc: [State; 5],
}

impl Dense {
    fn at(&self, r: f64) -> State {
        let t = (r - self.r0) / self.h;
        let t1 = 1.0 - t;
        let mut out = [0.0; 3];
        for (i, v) in out.iter_mut().enumerate() {
            let rc = &self.rc;
            *v = rc[0][i] + t * (rc[1][i] + t1 * (rc[2][i] + t * (rc[3][i] + t1 * rc[4][i])));
        }
        out
    }
}

struct Leg {
    points: Vec<(f64, State)>,
    end: EndpointKind,
}

struct Stepper<'a> {
    params: &'a SolitonParams,
    limits: &'a Limits,
}

impl Stepper<'_> {
    /// `y = (phi, phi', f)`.
    fn f(&self, y: &State) -> State {
        [y[1], rhs_unchecked(self.params, y[0], y[1]), y[0]]
    }

    fn error_norm(&self, y0: &State, y1: &State, e: &State) -> f64 {
        let l = self.limits;
        let s: f64 = (0..3)
            .map(|i| {
                let sc = l.atol + l.rtol * y0[i].abs().max(y1[i].abs());
                (e[i] / sc).powi(2)
            })
            .sum();
        (s / 3.0).sqrt()
    }

    fn run(&self, r0: f64, y0: State, r_end: f64) -> Result<Leg> {
        let l = self.limits;
        let dir = (r_end - r0).signum();
        let mut r = r0;
        let mut y = y0;
        let mut k1 = self.f(&y);
        let mut h = dir * l.max_step.min(1e-3);
        let mut points = vec![(r0, y0)];
        let mut grid_k = 1usize;
        let mut steps = 0usize;
        let mut rejected = false;
        loop {
            steps += 1;
            if steps > l.max_steps {
                return Err(Error::StepLimit(l.max_steps));
            }
            let remaining = r_end - r;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            } else if h.abs() < l.min_step || r + h == r {
                return Err(Error::StepUnderflow { r, h: h.abs() });
            }
            let k2 = self.f(&axpy(&y, &[(h * A21, &k1)]));
            let k3 = self.f(&axpy(&y, &[(h * A31, &k1), (h * A32, &k2)]));
            let k4 = self.f(&axpy(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
            let k5 = self.f(&axpy(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]));
            let k6 = self.f(&axpy(&y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]));
            let y1 = axpy(&y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
            let k7 = self.f(&y1);
            let e = axpy(&[0.0; 3], &[(h * E1, &k1), (h * E3, &k3), (h * E4, &k4), (h * E5, &k5), (h * E6, &k6), (h * E7, &k7)]);
            let err = self.error_norm(&y, &y1, &e);
            if !err.is_finite() || err > 1.0 {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
                h *= fac;
                rejected = true;
                if h.abs() < l.min_step {
                    return Err(Error::StepUnderflow { r, h: h.abs() });
                }
                continue;
            }
            let r1 = if last { r_end } else { r + h };
            let rc2: State = std::array::from_fn(|i| y1[i] - y[i]);
            let rc3: State = std::array::from_fn(|i| h * k1[i] - rc2[i]);
            let rc4: State = std::array::from_fn(|i| rc2[i] - h * k7[i] - rc3[i]);
            let rc5: State = std::array::from_fn(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
            let dense = Dense {
                r0: r,
                h,
                rc: [y, rc2, rc3, rc4, rc5],
            };

            let crossing = y1[0] <= l.phi_min;
            let r_stop = if crossing {
                // phi decreases through phi_min inside this step
                let (mut a, mut b) = (r, r1);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid == a || mid == b {
                        break;
                    }
                    if dense.at(mid)[0] > l.phi_min {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                b
            } else {
                r1
            };
            if let Some(dr) = l.output_step {
                loop {
                    let rg = r0 + dir * grid_k as f64 * dr;
                    if (rg - r_stop) * dir >= 0.0 {
                        break;
                    }
                    points.push((rg, dense.at(rg)));
                    grid_k += 1;
                }
            }
            if crossing {
                points.push((r_stop, dense.at(r_stop)));
                return Ok(Leg {
                    points,
                    end: EndpointKind::CriticalPoint,
                });
            }
            let blow_up = !y1[0].is_finite() || !y1[1].is_finite() || y1[0] > l.phi_max || y1[1].abs() > l.dphi_max;
            if l.output_step.is_none() || blow_up || last {
                points.push((r1, y1));
            }
            if blow_up {
                return Ok(Leg {
                    points,
                    end: EndpointKind::BlowUp,
                });
            }
            if last {
                return Ok(Leg {
                    points,
                    end: EndpointKind::IntegrationLimit,
                });
            }
            r = r1;
            y = y1;
            k1 = k7;
            let mut fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if rejected {
                fac = fac.min(1.0);
                rejected = false;
            }
            h = dir * (h.abs() * fac).min(l.max_step);
        }
    }
}

fn to_samples(params: &SolitonParams, pts: &[(f64, State)]) -> Vec<ProfileSample> {
    pts.iter()
        .map(|&(r, y)| ProfileSample {
            r,
            phi: y[0],
            dphi: y[1],
            ddphi: rhs_unchecked(params, y[0], y[1]),
            f: y[2],
            scalar: y[1] + params.rho,
        })
        .collect()
}

fn normalize_potential(samples: &mut [ProfileSample]) {
    let f0 = samples[0].f;
    for s in samples.iter_mut() {
        s.f -= f0;
    }
}

/// Integrates the profile ODE from `start` and returns the profile on the
/// resolved interval, classified.
pub fn integrate(params: &SolitonParams, start: Start, direction: Direction, limits: &Limits) -> Result<SolitonProfile> {
    params.validate()?;
    limits.validate()?;
    match start {
        Start::Origin { kappa, order, seed_radius } => {
            if direction != Direction::Forward {
                return Err(Error::Config("an origin start integrates forward only".into()));
            }
            let series = series_origin(params, kappa, order)?;
            let eps = seed_radius.unwrap_or_else(|| series.seed_radius(limits.rtol));
            if !(eps > 0.0 && eps < limits.r_max) {
                return Err(Error::Config(format!("seed radius {eps} outside (0, r_max)")));
            }
            let (phi, dphi, _) = series.eval(eps);
            let stepper = Stepper { params, limits };
            let leg = stepper.run(eps, [phi, dphi, series.potential(eps)], limits.r_max)?;
            let mut samples = vec![ProfileSample {
                r: 0.0,
                phi: 0.0,
                dphi: series.coefficients[1],
                ddphi: 0.0,
                f: 0.0,
                scalar: series.coefficients[1] + params.rho,
            }];
            samples.extend(to_samples(params, &leg.points));
            SolitonProfile::from_samples(*params, samples, (EndpointKind::CriticalPoint, leg.end), limits.phi_min)
        }
        Start::State(s) => {
            if s.phi == 0.0 {
                return Err(Error::SingularState(s.r));
            }
            let reflected = s.phi < 0.0;
            let (s, direction, lim) = if reflected {
                let flipped = match direction {
                    Direction::Forward => Direction::Backward,
                    Direction::Backward => Direction::Forward,
                    Direction::Both => Direction::Both,
                };
                let mut lim = *limits;
                lim.r_max = -limits.r_min;
                lim.r_min = -limits.r_max;
                (ProfileState::new(-s.r, -s.phi, s.p), flipped, lim)
            } else {
                (s, direction, *limits)
            };
            if !(s.phi > lim.phi_min) {
                return Err(Error::Config(format!("|phi0| = {} is below phi_min", s.phi)));
            }
            let forward = matches!(direction, Direction::Forward | Direction::Both);
            let backward = matches!(direction, Direction::Backward | Direction::Both);
            if forward && !(lim.r_max > s.r) {
                return Err(Error::Config(format!("r_max must exceed the start radius {}", s.r)));
            }
            if backward && !(lim.r_min < s.r) {
                return Err(Error::Config(format!("r_min must be below the start radius {}", s.r)));
            }
            let stepper = Stepper { params, limits: &lim };
            let y0 = [s.phi, s.p, 0.0];
            let mut pts = Vec::new();
            let mut kinds = (EndpointKind::IntegrationLimit, EndpointKind::IntegrationLimit);
            if backward {
                let leg = stepper.run(s.r, y0, lim.r_min)?;
                kinds.0 = leg.end;
                pts.extend(leg.points.into_iter().rev());
            }
            if forward {
                let leg = stepper.run(s.r, y0, lim.r_max)?;
                kinds.1 = leg.end;
                let skip = usize::from(backward);
                pts.extend(leg.points.into_iter().skip(skip));
            }
            let mut samples = to_samples(params, &pts);
            normalize_potential(&mut samples);
            let mut profile = SolitonProfile::from_samples(*params, samples, kinds, lim.phi_min)?;
            profile.set_flags(reflected, backward);
            Ok(profile)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::Classification;

    #[test]
    fn expander_both_directions() {
        let params = SolitonParams::new(3, -1.0, 2.0).unwrap();
        let prof = integrate(&params, Start::State(ProfileState::new(1.0, 1.0, 1.0)), Direction::Both, &Limits::default()).unwrap();
        let err = prof.samples().iter().map(|s| (s.phi - s.r).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert_eq!(prof.domain().0.kind, EndpointKind::CriticalPoint);
        assert_eq!(prof.classification(), Classification::RotationallySymmetric);
        assert!(prof.backward());
        assert_eq!(prof.samples()[0].f, 0.0);
    }

    #[test]
    fn reflection_and_validation() {
        let params = SolitonParams::new(3, -1.0, 2.0).unwrap();
        let prof = integrate(&params, Start::State(ProfileState::new(-2.0, -2.0, 1.0)), Direction::Backward, &Limits::default()).unwrap();
        assert!(prof.reflected());
        assert!(prof.samples().iter().all(|s| s.phi > 0.0));
        assert_eq!(prof.domain().1.r, 10.0);
        let bad = Limits { rtol: 0.0, ..Limits::default() };
        assert!(matches!(integrate(&params, Start::State(ProfileState::new(1.0, 1.0, 1.0)), Direction::Forward, &bad), Err(Error::Config(_))));
        assert!(matches!(integrate(&params, Start::State(ProfileState::new(1.0, 0.0, 1.0)), Direction::Forward, &Limits::default()), Err(Error::SingularState(_))));
        assert!(integrate(&params, Start::origin(1.0), Direction::Both, &Limits::default()).is_err());
        let few = Limits { max_steps: 3, ..Limits::default() };
        assert!(matches!(integrate(&params, Start::origin(1.0), Direction::Forward, &few), Err(Error::StepLimit(3))));
    }

    #[test]
    fn output_grid() {
        let params = SolitonParams::new(3, 1.0, 4.0).unwrap();
        let lim = Limits { r_max: 1.0, output_step: Some(0.25), ..Limits::default() };
        let prof = integrate(&params, Start::State(ProfileState::new(0.0, 2.0, 0.0)), Direction::Forward, &lim).unwrap();
        let rs: Vec<f64> = prof.samples().iter().map(|s| s.r).collect();
        assert_eq!(rs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}

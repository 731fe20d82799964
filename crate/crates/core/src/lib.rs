//! Construction and verification of gradient Yamabe solitons.
//!
//! A nontrivial complete gradient Yamabe soliton `Hess f = (R - rho) g` is a
//! warped product `dr^2 + phi(r)^2 gbar` over a one-dimensional base with
//! `phi = f'`. This crate builds such metrics numerically and checks them:
//!
//! - [`tensor`]: finite-difference curvature engine on coordinate charts, used
//!   as the independent oracle for everything else.
//! - [`warped`]: closed-form curvature of warped products, fiber catalog and
//!   chart construction.
//! - [`ode`]: the profile ODE for `phi`, its series at a critical point of `f`,
//!   an adaptive integrator and the profile classifier.
//! - [`verify`]: named, tolerance-checked residuals assembled into a report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod ode;
pub mod tensor;
pub mod verify;
pub mod warped;

pub use error::{Error, Result};

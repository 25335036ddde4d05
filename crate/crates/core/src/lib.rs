//! Large-deviation fundamental solutions for a Gaussian velocity-jump process.
//!
//! * [`closed_form`]: minimum values `mu`, kernels `phi`, trajectories and brute-force oracles.
//! * [`minplus`]: the min-plus recursion for `mu_n` and grid Hopf-Lax evaluation.
//! * [`kinetic`]: semi-Lagrangian BGK solver with Hopf-Cole diagnostics.
//! * [`pdmp`]: Monte-Carlo sampler of the velocity-jump process.
//! * [`front`]: reaction fronts, rate fits and the Freidlin profile check.
//! * [`io`]: CSV exchange for min-plus fields.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod extended;
pub mod front;
pub mod grid;
pub mod io;
pub mod kinetic;
pub mod minplus;
pub mod pdmp;
pub mod scalar;

pub use error::{Error, Result};
pub use extended::ExtendedValue;
pub use scalar::Real;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Extended = ExtendedValue<f64>;
pub type Phase = closed_form::PhasePoint<f64>;
pub type Rates = closed_form::RateParams<f64>;
pub type Path = closed_form::Trajectory<f64>;
pub type Grid = grid::UniformGrid<f64>;
pub type VGrid = grid::VelocityGrid<f64>;
pub type Mu = minplus::MuField<f64>;
pub type Phase2 = minplus::PhaseField<f64>;
pub type Scheme = minplus::SchemeState<f64>;

//! Hermite-spectral computation of the nonlinear Schrödinger scattering
//! operator through the lens transform (d = 1).

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod hermite;
pub mod lens_map;
pub mod observables;
mod parallel;
pub mod state;
pub mod stationary;

pub use error::{Error, Result};
pub use hermite::{QuadratureRule, SpectralField, TransformPlan};
pub use state::{AsymptoticState, LensState, Nonlinearity, Side};

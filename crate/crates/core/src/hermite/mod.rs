//! Hermite-function basis: quadrature, stable transforms and the exact
//! coefficient-space operators (Fourier, parity, ∂ₓ, multiplication by x).

mod field;
mod quadrature;
mod recurrence;
mod transform;

pub use field::{coeff_norm, eigenvalue, SpectralField};
pub use quadrature::{QuadratureRule, MAX_NODES};
pub use transform::{evaluate_at, lp_norm, TransformPlan, DENSE_LIMIT};

pub(crate) use transform::lp_norm_of_values;

//! Seeded random coefficient fields.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{eigenvalue, SpectralField, TransformPlan};

/// Name written to metadata sidecars.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.10, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    /// U_m uniform on [0,1] + i[0,1].
    UnitSquare,
    /// λ_m⁻¹ U_m.
    LambdaWeighted,
}

impl std::str::FromStr for RandomKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_square" => Ok(Self::UnitSquare),
            "lambda_weighted" => Ok(Self::LambdaWeighted),
            other => Err(Error::invalid(format!("unknown random data kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomDataSpec {
    pub kind: RandomKind,
    pub m: usize,
    pub seed: u64,
}

impl RandomDataSpec {
    pub fn new(kind: RandomKind, m: usize, seed: u64) -> Self {
        Self { kind, m, seed }
    }
}

/// Draws Re U_m then Im U_m for m = 0, 1, … from one stream.
pub fn gen_random_state(spec: &RandomDataSpec) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coeffs = (0..spec.m)
        .map(|m| {
            let re: f64 = rng.random_range(0.0..1.0);
            let im: f64 = rng.random_range(0.0..1.0);
            let u = Complex64::new(re, im);
            match spec.kind {
                RandomKind::UnitSquare => u,
                RandomKind::LambdaWeighted => u / eigenvalue(m, 1),
            }
        })
        .collect();
    SpectralField::new(coeffs)
}

/// `field` zero-padded (or truncated) to `m` modes.
pub fn resized(field: &SpectralField, m: usize) -> SpectralField {
    let mut c = field.coeffs().to_vec();
    c.resize(m, Complex64::new(0.0, 0.0));
    SpectralField::new(c)
}

/// Rescales so that the largest node modulus on `plan` equals `amplitude`.
pub fn scale_to_amplitude(field: &SpectralField, amplitude: f64, plan: &TransformPlan) -> Result<SpectralField> {
    let values = plan.synthesize(field)?;
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::invalid("cannot rescale a zero field to a nonzero amplitude"));
    }
    Ok(field.scaled(Complex64::new(amplitude / peak, 0.0)))
}

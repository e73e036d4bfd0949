use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::SpectralField;

/// Sign in front of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Defocusing,
    Focusing,
}

impl Nonlinearity {
    pub fn sign(self) -> f64 {
        match self {
            Self::Defocusing => 1.0,
            Self::Focusing => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Self::Defocusing),
            -1 => Ok(Self::Focusing),
            other => Err(Error::invalid(format!("sign must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// u₋ or u₊ in Hermite coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticState {
    pub field: SpectralField,
    pub side: Side,
}

impl AsymptoticState {
    pub fn new(field: SpectralField, side: Side) -> Result<Self> {
        if !field.is_finite() {
            return Err(Error::invalid("asymptotic state has non-finite coefficients"));
        }
        Ok(Self { field, side })
    }

    pub fn minus(field: SpectralField) -> Result<Self> {
        Self::new(field, Side::Minus)
    }
}

/// The lens-transformed field v(t, ·) at lens time t ∈ [−π/2, π/2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensState {
    pub field: SpectralField,
    pub t_lens: f64,
}

impl LensState {
    pub fn new(field: SpectralField, t_lens: f64) -> Result<Self> {
        if !(t_lens.abs() <= FRAC_PI_2 + 1e-12) {
            return Err(Error::Domain(format!("lens time {t_lens} outside [−π/2, π/2]")));
        }
        if !field.is_finite() {
            return Err(Error::invalid("lens state has non-finite coefficients"));
        }
        Ok(Self { field, t_lens })
    }
}

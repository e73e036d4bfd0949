use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// (−i)^m for m mod 4.
const MINUS_I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, -1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
];

/// Coefficients α₀..α_{M−1} of f = Σ α_m ψ_m in the orthonormal Hermite
/// function basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(m: usize) -> Self {
        Self::new(vec![ZERO; m])
    }

    /// The basis vector e_k, i.e. the coefficients of ψ_k.
    pub fn basis(m: usize, k: usize) -> Self {
        let mut f = Self::zeros(m);
        f.coeffs[k] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// L² norm, √Σ|α_m|² by orthonormality.
    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn map_indexed(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self::new(self.coeffs.iter().enumerate().map(|(m, &c)| f(m, c)).collect())
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    /// ⟨a, b⟩ = Σ a_m conj(b_m) = ∫ a conj(b).
    pub fn l2_inner(&self, other: &Self) -> Result<Complex64> {
        self.check_len(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    /// Fourier transform (unitary convention); ψ_m ↦ (−i)^m ψ_m, or (+i)^m
    /// for the inverse.
    pub fn fourier(&self, inverse: bool) -> Self {
        self.map_indexed(|m, c| {
            let idx = if inverse { (4 - m % 4) % 4 } else { m % 4 };
            c * MINUS_I_POWERS[idx]
        })
    }

    /// f(x) ↦ f(−x).
    pub fn reflect(&self) -> Self {
        self.map_indexed(|m, c| if m % 2 == 0 { c } else { -c })
    }

    /// Coefficients of f′ on modes 0..=M (one more than the input).
    pub fn derivative_extended(&self) -> Vec<Complex64> {
        let m = self.len();
        (0..=m)
            .map(|k| {
                let up = if k + 1 < m {
                    self.coeffs[k + 1] * ((k as f64 + 1.0) / 2.0).sqrt()
                } else {
                    ZERO
                };
                let down = if k >= 1 && k - 1 < m {
                    self.coeffs[k - 1] * (k as f64 / 2.0).sqrt()
                } else {
                    ZERO
                };
                up - down
            })
            .collect()
    }

    /// Coefficients of x·f on modes 0..=M.
    pub fn times_x_extended(&self) -> Vec<Complex64> {
        let m = self.len();
        (0..=m)
            .map(|k| {
                let up = if k + 1 < m {
                    self.coeffs[k + 1] * ((k as f64 + 1.0) / 2.0).sqrt()
                } else {
                    ZERO
                };
                let down = if k >= 1 && k - 1 < m {
                    self.coeffs[k - 1] * (k as f64 / 2.0).sqrt()
                } else {
                    ZERO
                };
                up + down
            })
            .collect()
    }

    /// f′, truncated to the input's M modes.
    pub fn differentiate(&self) -> Self {
        let mut c = self.derivative_extended();
        c.truncate(self.len());
        Self::new(c)
    }

    /// x·f, truncated to the input's M modes.
    pub fn multiply_by_x(&self) -> Self {
        let mut c = self.times_x_extended();
        c.truncate(self.len());
        Self::new(c)
    }

    /// √(Σ_m λ_m^k |α_m|²) with λ_m = d/2 + m.
    pub fn sigma_norm(&self, k: u32, d: usize) -> f64 {
        let half_d = d as f64 / 2.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| (half_d + m as f64).powi(k as i32) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// λ_m = d/2 + m, the harmonic-oscillator eigenvalue of ψ_m.
pub fn eigenvalue(m: usize, d: usize) -> f64 {
    d as f64 / 2.0 + m as f64
}

/// Norm of a coefficient slice (used on the extended M+1 outputs).
pub fn coeff_norm(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

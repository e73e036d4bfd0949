//! Asymptotic states ↔ lens endpoint states, and the scattering pipeline.
//!
//! At the endpoints v(−π/2, x) = e^{iπ/4} û₋(−x) and v(π/2) = e^{−iπ/4} û₊
//! (d = 1). On coefficients the Fourier transform is (−i)^m and the
//! reflection (−1)^m, so both maps are diagonal unit-modulus phases.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{propagate, EvolutionConfig, Propagation};
use crate::hermite::{SpectralField, TransformPlan};
pub use crate::state::{AsymptoticState, LensState, Nonlinearity, Side};

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub d: usize,
    pub sigma: f64,
    pub nonlinearity: Nonlinearity,
    pub m: usize,
    pub tau: f64,
    pub long_range: bool,
    /// Distance of the first and last lens times from ∓π/2.
    pub endpoint_offset: f64,
    /// Multiplies the nonlinearity; 0 turns the run into free flow.
    pub coupling: f64,
}

impl ScatterConfig {
    /// Short-range configuration (requires dσ > 1).
    pub fn short_range(sigma: f64, nonlinearity: Nonlinearity, m: usize, tau: f64) -> Self {
        Self {
            d: 1,
            sigma,
            nonlinearity,
            m,
            tau,
            long_range: false,
            endpoint_offset: 0.0,
            coupling: 1.0,
        }
    }

    /// The 1D cubic case, with both endpoints pulled in by one step τ.
    pub fn long_range(nonlinearity: Nonlinearity, m: usize, tau: f64) -> Self {
        Self {
            d: 1,
            sigma: 1.0,
            nonlinearity,
            m,
            tau,
            long_range: true,
            endpoint_offset: tau,
            coupling: 1.0,
        }
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 1 {
            return Err(Error::invalid(format!("only d = 1 is implemented, got {}", self.d)));
        }
        if !(self.sigma > 0.0) || self.m == 0 || !(self.tau > 0.0) {
            return Err(Error::invalid("sigma, M and tau must be positive"));
        }
        let ds = self.d as f64 * self.sigma;
        if self.long_range {
            if (ds - 1.0).abs() > 1e-14 {
                return Err(Error::invalid(format!("long-range mode needs d·σ = 1, got {ds}")));
            }
            if !(self.endpoint_offset > 0.0 && self.endpoint_offset < FRAC_PI_2) {
                return Err(Error::invalid("long-range mode needs an endpoint offset in (0, π/2)"));
            }
        } else {
            if !(ds > 1.0) {
                return Err(Error::invalid(format!(
                    "short-range mode needs d·σ > 1, got {ds}; use the long-range pipeline at d·σ = 1"
                )));
            }
            if self.endpoint_offset != 0.0 {
                return Err(Error::invalid("short-range mode runs endpoint to endpoint (offset 0)"));
            }
        }
        Ok(())
    }

    pub fn t_start(&self) -> f64 {
        -FRAC_PI_2 + self.endpoint_offset
    }

    pub fn t_end(&self) -> f64 {
        FRAC_PI_2 - self.endpoint_offset
    }

    pub fn evolution(&self) -> EvolutionConfig {
        let mut cfg = EvolutionConfig::new(self.sigma, self.nonlinearity, self.m, self.tau, self.t_start(), self.t_end())
            .with_coupling(self.coupling);
        cfg.d = self.d;
        cfg
    }

    /// ln tan(π/2 − offset), the lens-side stand-in for ln|t|.
    pub fn log_phase_factor(&self) -> f64 {
        (FRAC_PI_2 - self.endpoint_offset).tan().ln()
    }
}

/// β_m = e^{iπ/4} i^m α_m.
fn endpoint_phase(field: &SpectralField) -> SpectralField {
    let global = Complex64::cis(FRAC_PI_4);
    field.map_indexed(|m, c| c * global * I_POWERS[m % 4])
}

/// α_m = e^{−iπ/4} (−i)^m β_m, the inverse of [`endpoint_phase`].
fn endpoint_phase_inverse(field: &SpectralField) -> SpectralField {
    let global = Complex64::cis(-FRAC_PI_4);
    field.map_indexed(|m, c| c * global * I_POWERS[(4 - m % 4) % 4])
}

fn check_dims(field: &SpectralField, cfg: &ScatterConfig) -> Result<()> {
    if field.len() != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: cfg.m,
            got: field.len(),
        });
    }
    Ok(())
}

fn check_time(t: f64, expected: f64) -> Result<()> {
    if (t - expected).abs() > ENDPOINT_TOL {
        return Err(Error::invalid(format!("state is at lens time {t}, expected {expected}")));
    }
    Ok(())
}

/// v(−π/2) from u₋.
pub fn inject_minus(u_minus: &AsymptoticState, cfg: &ScatterConfig) -> Result<LensState> {
    if cfg.long_range {
        return Err(Error::invalid("long-range configuration: use inject_minus_long_range"));
    }
    check_dims(&u_minus.field, cfg)?;
    Ok(LensState {
        field: endpoint_phase(&u_minus.field),
        t_lens: -FRAC_PI_2,
    })
}

/// u₊ from v(π/2).
pub fn extract_plus(v_end: &LensState, cfg: &ScatterConfig) -> Result<AsymptoticState> {
    if cfg.long_range {
        return Err(Error::invalid("long-range configuration: use extract_plus_long_range"));
    }
    check_dims(&v_end.field, cfg)?;
    check_time(v_end.t_lens, FRAC_PI_2)?;
    Ok(AsymptoticState {
        field: endpoint_phase(&v_end.field),
        side: Side::Plus,
    })
}

/// Inverse of [`extract_plus`]: the v(π/2) that a given u₊ corresponds to.
pub fn endpoint_of_plus(u_plus: &AsymptoticState) -> LensState {
    LensState {
        field: endpoint_phase_inverse(&u_plus.field),
        t_lens: FRAC_PI_2,
    }
}

/// Inverse of [`inject_minus`].
pub fn asymptotic_of_start(v_start: &LensState) -> AsymptoticState {
    AsymptoticState {
        field: endpoint_phase_inverse(&v_start.field),
        side: Side::Minus,
    }
}

/// Multiplies node values by exp(i·sign·|v|²·L).
fn log_phase(field: &SpectralField, sign: f64, log_factor: f64, plan: &TransformPlan) -> Result<SpectralField> {
    let mut values = plan.synthesize(field)?;
    for v in values.iter_mut() {
        *v *= Complex64::cis(sign * v.norm_sqr() * log_factor);
    }
    plan.analyze(&values)
}

fn long_range_strength(cfg: &ScatterConfig) -> f64 {
    cfg.nonlinearity.sign() * cfg.coupling
}

/// v(−π/2 + τ) from u₋ with the logarithmic phase correction.
pub fn inject_minus_long_range(u_minus: &AsymptoticState, cfg: &ScatterConfig, plan: &TransformPlan) -> Result<LensState> {
    if !cfg.long_range {
        return Err(Error::invalid("short-range configuration: use inject_minus"));
    }
    check_dims(&u_minus.field, cfg)?;
    let base = endpoint_phase(&u_minus.field);
    let field = log_phase(&base, long_range_strength(cfg), cfg.log_phase_factor(), plan)?;
    Ok(LensState {
        field,
        t_lens: cfg.t_start(),
    })
}

/// u₊ from v(π/2 − τ), undoing the logarithmic phase pointwise.
pub fn extract_plus_long_range(v_end: &LensState, cfg: &ScatterConfig, plan: &TransformPlan) -> Result<AsymptoticState> {
    if !cfg.long_range {
        return Err(Error::invalid("short-range configuration: use extract_plus"));
    }
    check_dims(&v_end.field, cfg)?;
    check_time(v_end.t_lens, cfg.t_end())?;
    let corrected = log_phase(&v_end.field, long_range_strength(cfg), cfg.log_phase_factor(), plan)?;
    Ok(AsymptoticState {
        field: endpoint_phase(&corrected),
        side: Side::Plus,
    })
}

/// S(u₋) together with the run that produced it.
#[derive(Debug, Clone)]
pub struct ScatterOutcome {
    pub u_plus: AsymptoticState,
    pub run: Propagation,
}

/// S(u₋) through the lens pipeline, short- or long-range according to `cfg`.
pub fn scatter_with(u_minus: &AsymptoticState, cfg: &ScatterConfig, plan: &TransformPlan, record_stride: Option<usize>) -> Result<ScatterOutcome> {
    cfg.validate()?;
    let mut evo = cfg.evolution();
    if let Some(stride) = record_stride {
        evo = evo.recording(stride);
    }
    if cfg.long_range {
        let v0 = inject_minus_long_range(u_minus, cfg, plan)?;
        let run = propagate(&v0, &evo, plan)?;
        let u_plus = extract_plus_long_range(&run.state, cfg, plan)?;
        Ok(ScatterOutcome { u_plus, run })
    } else {
        let v0 = inject_minus(u_minus, cfg)?;
        let run = propagate(&v0, &evo, plan)?;
        let u_plus = extract_plus(&run.state, cfg)?;
        Ok(ScatterOutcome { u_plus, run })
    }
}

/// S(u₋) in short-range mode.
pub fn scatter(u_minus: &AsymptoticState, cfg: &ScatterConfig, plan: &TransformPlan) -> Result<AsymptoticState> {
    if cfg.long_range {
        return Err(Error::invalid("long-range configuration: use scatter_long_range"));
    }
    Ok(scatter_with(u_minus, cfg, plan, None)?.u_plus)
}

/// S(u₋) in long-range mode (d·σ = 1).
pub fn scatter_long_range(u_minus: &AsymptoticState, cfg: &ScatterConfig, plan: &TransformPlan) -> Result<AsymptoticState> {
    if !cfg.long_range {
        return Err(Error::invalid("short-range configuration: use scatter"));
    }
    Ok(scatter_with(u_minus, cfg, plan, None)?.u_plus)
}

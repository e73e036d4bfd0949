//! Conserved and monitored quantities.
//!
//! Derivatives and x-multiplication act exactly on coefficients (one extra
//! mode), so mass, kinetic, momentum, centre and the lens diagnostics carry
//! no quadrature error. Only Lᵖ norms with p ≠ 2 go through the grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{coeff_norm, lp_norm_of_values, SpectralField, TransformPlan};
use crate::state::{AsymptoticState, LensState, Nonlinearity};

pub const CSV_HEADER: &str = "t_lens,mass,kinetic,momentum,centre,sigma_norm,j_norm,linf";

/// Window in tan t over which growth slopes are fitted by default.
pub const DEFAULT_GROWTH_WINDOW: (f64, f64) = (10.0, 100.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t_lens: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub momentum: f64,
    pub centre: f64,
    pub sigma_norm: f64,
    pub j_norm: f64,
    pub linf: f64,
    pub lp_extra: Option<f64>,
}

impl ObservableRecord {
    /// One row in [`CSV_HEADER`] order; `lp_extra` is not part of the row.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.t_lens,
            self.mass,
            self.kinetic,
            self.momentum,
            self.centre,
            self.sigma_norm,
            self.j_norm,
            self.linf
        )
    }
}

/// 𝓘₁..𝓘₄ of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    /// ‖u‖
    pub mass: f64,
    /// ‖∇u‖²
    pub kinetic: f64,
    /// Im ∫ ū ∇u
    pub momentum: f64,
    /// ∫ x|u|²
    pub centre: f64,
}

impl Invariants {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mass, self.kinetic, self.momentum, self.centre]
    }

    /// Componentwise |self − other|.
    pub fn gaps(&self, other: &Invariants) -> [f64; 4] {
        let a = self.as_array();
        let b = other.as_array();
        [0, 1, 2, 3].map(|i| (a[i] - b[i]).abs())
    }
}

fn pair_sum(ext: &[Complex64], field: &SpectralField) -> Complex64 {
    ext.iter().zip(field.coeffs()).map(|(a, b)| a * b.conj()).sum()
}

pub fn invariants_of(field: &SpectralField) -> Invariants {
    let deriv = field.derivative_extended();
    let xf = field.times_x_extended();
    let kinetic = coeff_norm(&deriv).powi(2);
    Invariants {
        mass: field.l2_norm(),
        kinetic,
        // ∫ u′ ū = Σ β_m conj α_m
        momentum: pair_sum(&deriv, field).im,
        centre: pair_sum(&xf, field).re,
    }
}

/// (‖f‖² + ‖∇f‖² + ‖xf‖²)^{1/2} = (Σ (1 + 2λ_m)|α_m|²)^{1/2}.
pub fn sigma_norm(field: &SpectralField) -> f64 {
    field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| (2.0 + 2.0 * m as f64) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// ‖f‖_{Lᵖ} on the quadrature grid of `plan`.
pub fn lp_norm(field: &SpectralField, p: f64, plan: &TransformPlan) -> Result<f64> {
    crate::hermite::lp_norm(field, p, plan)
}

/// max_k |f(x_k)| over the nodes.
pub fn linf_norm(field: &SpectralField, plan: &TransformPlan) -> Result<f64> {
    let values = plan.synthesize(field)?;
    Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// ½‖∇u‖² + sign/(σ+1) ‖u‖^{2σ+2}_{L^{2σ+2}}.
pub fn energy_of(field: &SpectralField, sigma: f64, nonlinearity: Nonlinearity, plan: &TransformPlan) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let kinetic = coeff_norm(&field.derivative_extended()).powi(2);
    let p = 2.0 * sigma + 2.0;
    let potential = lp_norm(field, p, plan)?.powf(p);
    Ok(0.5 * kinetic + nonlinearity.sign() / (sigma + 1.0) * potential)
}

/// Energy of the lens-transformed equation at σ = 2/d (autonomous case):
/// ½‖∇v‖² + ½‖xv‖² + sign/(σ+1) ‖v‖^{2σ+2}_{L^{2σ+2}}.
pub fn lens_energy(field: &SpectralField, sigma: f64, nonlinearity: Nonlinearity, plan: &TransformPlan) -> Result<f64> {
    let harmonic: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| (0.5 + m as f64) * c.norm_sqr())
        .sum();
    let p = 2.0 * sigma + 2.0;
    let potential = lp_norm(field, p, plan)?.powf(p);
    Ok(harmonic + nonlinearity.sign() / (sigma + 1.0) * potential)
}

/// One side of the L²-critical moment identity:
/// ‖xu‖² + sign·(2d/(2+d))·‖û‖^{2+4/d}_{L^{2+4/d}}.
pub fn moment_functional(field: &SpectralField, d: usize, nonlinearity: Nonlinearity, plan: &TransformPlan) -> Result<f64> {
    let d = d as f64;
    let p = 2.0 + 4.0 / d;
    let x_part = coeff_norm(&field.times_x_extended()).powi(2);
    let hat = field.fourier(false);
    let l = lp_norm(&hat, p, plan)?;
    Ok(x_part + nonlinearity.sign() * (2.0 * d / (2.0 + d)) * l.powf(p))
}

/// |moment(u₋) − moment(u₊)|.
pub fn moment_identity_gap(
    u_minus: &AsymptoticState,
    u_plus: &AsymptoticState,
    d: usize,
    nonlinearity: Nonlinearity,
    plan: &TransformPlan,
) -> Result<f64> {
    let a = moment_functional(&u_minus.field, d, nonlinearity, plan)?;
    let b = moment_functional(&u_plus.field, d, nonlinearity, plan)?;
    Ok((a - b).abs())
}

/// (‖x v sin t − i cos t ∇v‖, ‖x v cos t + i sin t ∇v‖): the first is
/// ‖∇u(tan t)‖, the second ‖J(tan t) u(tan t)‖.
pub fn lens_diagnostics(v: &LensState) -> (f64, f64) {
    let xv = v.field.times_x_extended();
    let dv = v.field.derivative_extended();
    let (s, c) = v.t_lens.sin_cos();
    let i = Complex64::i();
    let a: Vec<Complex64> = xv.iter().zip(&dv).map(|(x, g)| x * s - i * c * g).collect();
    let j: Vec<Complex64> = xv.iter().zip(&dv).map(|(x, g)| x * c + i * s * g).collect();
    (coeff_norm(&a), coeff_norm(&j))
}

/// Full observable row for a lens state.
pub fn record_of(state: &LensState, plan: &TransformPlan) -> ObservableRecord {
    let inv = invariants_of(&state.field);
    let (_, j_norm) = lens_diagnostics(state);
    let mut values = vec![Complex64::new(0.0, 0.0); plan.len()];
    plan.synthesize_into(state.field.coeffs(), &mut values);
    let linf = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    ObservableRecord {
        t_lens: state.t_lens,
        mass: inv.mass,
        kinetic: inv.kinetic,
        momentum: inv.momentum,
        centre: inv.centre,
        sigma_norm: sigma_norm(&state.field),
        j_norm,
        linf,
        lp_extra: None,
    }
}

/// Same as [`record_of`] plus ‖v‖_{Lᵖ} in `lp_extra`.
pub fn record_with_lp(state: &LensState, p: f64, plan: &TransformPlan) -> Result<ObservableRecord> {
    let mut rec = record_of(state, plan);
    let values = plan.synthesize(&state.field)?;
    rec.lp_extra = Some(lp_norm_of_values(&values, p, plan));
    Ok(rec)
}

/// Least-squares slope of ln j against ln(1 + tan t) over rows (t_lens, j)
/// with tan t inside `window`.
pub fn growth_slope(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, j)| {
            let s = t.tan();
            s >= lo && s <= hi && *j > 0.0 && t.abs() < std::f64::consts::FRAC_PI_2
        })
        .map(|(t, j)| ((1.0 + t.tan()).ln(), j.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::invalid(format!(
            "growth slope needs at least 4 points with tan t in [{lo}, {hi}], got {}",
            pts.len()
        )));
    }
    fit_slope(&pts)
}

/// Least-squares slope of ln y against ln x, for convergence studies.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid("need at least two positive points for a slope"));
    }
    fit_slope(&pts)
}

fn fit_slope(pts: &[(f64, f64)]) -> Result<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit has no spread in the abscissa"));
    }
    Ok(sxy / sxx)
}

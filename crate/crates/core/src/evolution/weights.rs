//! ∫ (cos s)^p ds over one lens time step.
//!
//! p = dσ − 2 is zero in the L²-critical case, −1 in the 1D cubic case and a
//! non-integer in between. For −1 < p < 0 the integrand blows up at ±π/2 but
//! stays integrable; u = π/2 − |s| followed by u = r^{1/(1+p)} turns the
//! pieces into integrals of the smooth function (sin u / u)^p.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Absolute tolerance of the adaptive quadrature.
pub const WEIGHT_TOL: f64 = 1e-12;

const ENDPOINT_SLACK: f64 = 1e-12;
const MAX_DEPTH: u32 = 48;

// 15-point Kronrod extension of the 7-point Gauss–Legendre rule on [−1, 1];
// abscissae listed from the outside in, the last one is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526,
    0.949_107_912_342_758_524_526_189_684_048,
    0.864_864_423_359_769_072_789_712_788_641,
    0.741_531_185_599_394_439_863_864_773_281,
    0.586_087_235_467_691_130_294_144_845_693,
    0.405_845_151_377_397_166_906_606_412_077,
    0.207_784_955_007_898_467_600_689_403_773,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_059,
    0.063_092_092_629_978_553_290_700_663_189,
    0.104_790_010_322_250_183_839_876_322_542,
    0.140_653_259_715_525_918_745_189_590_510,
    0.169_004_726_639_267_902_826_583_426_599,
    0.190_350_578_064_785_409_913_256_402_421,
    0.204_432_940_075_298_892_414_161_999_235,
    0.209_482_141_084_727_828_012_999_174_892,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679,
    0.279_705_391_489_276_667_901_467_771_424,
    0.381_830_050_505_118_944_950_369_775_489,
    0.417_959_183_673_469_387_755_102_040_816,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection with GK15 panels to absolute tolerance `tol`.
pub(crate) fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (value, err) = whole;
        if err <= tol.max(8.0 * f64::EPSILON * value.abs()) || depth >= MAX_DEPTH {
            return value;
        }
        let mid = 0.5 * (a + b);
        let left = gk15(f, a, mid);
        let right = gk15(f, mid, b);
        refine(f, a, mid, 0.5 * tol, left, depth + 1) + refine(f, mid, b, 0.5 * tol, right, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gk15(&f, a, b);
    refine(&f, a, b, tol, whole, 0)
}

/// ∫_t^{t+τ} (cos s)^p ds.
///
/// Endpoints may sit on ±π/2 when p > −1; for p ≤ −1 that is a domain error.
/// τ < 0 gives the negated integral over [t+τ, t].
pub fn cosine_weight(t: f64, tau: f64, exponent: f64) -> Result<f64> {
    if !(t.is_finite() && tau.is_finite() && exponent.is_finite()) {
        return Err(Error::invalid("cosine_weight arguments must be finite"));
    }
    if tau < 0.0 {
        return cosine_weight(t + tau, -tau, exponent).map(|w| -w);
    }
    let (a, b) = (t, t + tau);
    if a < -FRAC_PI_2 - ENDPOINT_SLACK || b > FRAC_PI_2 + ENDPOINT_SLACK {
        return Err(Error::Domain(format!(
            "interval [{a}, {b}] leaves [−π/2, π/2]"
        )));
    }
    let a = a.max(-FRAC_PI_2);
    let b = b.min(FRAC_PI_2);
    if tau == 0.0 {
        return Ok(0.0);
    }
    if exponent == 0.0 {
        return Ok(tau);
    }
    let touches = FRAC_PI_2 - a.abs() <= ENDPOINT_SLACK || FRAC_PI_2 - b.abs() <= ENDPOINT_SLACK;
    if exponent <= -1.0 && touches {
        return Err(Error::Domain(format!(
            "(cos s)^{exponent} is not integrable up to ±π/2 (interval [{a}, {b}])"
        )));
    }
    if exponent == -1.0 {
        return Ok(secant_antiderivative(b) - secant_antiderivative(a));
    }
    if exponent > 0.0 && exponent.fract() == 0.0 {
        // smooth integrand, no substitution needed
        return Ok(integrate_adaptive(|s| s.cos().powf(exponent), a, b, WEIGHT_TOL));
    }
    if exponent < -1.0 {
        return Ok(integrate_adaptive(|s| s.cos().powf(exponent), a, b, WEIGHT_TOL));
    }
    // split at 0 and use evenness: each piece is ∫_{u0}^{u1} (sin u)^p du
    let piece = |lo: f64, hi: f64| sine_power_integral(FRAC_PI_2 - hi, FRAC_PI_2 - lo, exponent);
    let value = if a >= 0.0 {
        piece(a, b)
    } else if b <= 0.0 {
        piece(-b, -a)
    } else {
        piece(0.0, -a) + piece(0.0, b)
    };
    Ok(value)
}

/// ln tan(s/2 + π/4), an antiderivative of sec s.
fn secant_antiderivative(s: f64) -> f64 {
    ((1.0 + s.sin()) / s.cos()).ln()
}

/// ∫_{u0}^{u1} (sin u)^p du for 0 ≤ u0 ≤ u1 ≤ π/2 and p > −1.
fn sine_power_integral(u0: f64, u1: f64, p: f64) -> f64 {
    let k = 1.0 / (1.0 + p);
    let g = move |r: f64| {
        let u = r.powf(k);
        let sinc = if u < 1e-4 { 1.0 - u * u / 6.0 } else { u.sin() / u };
        sinc.powf(p)
    };
    let r0 = u0.max(0.0).powf(1.0 + p);
    let r1 = u1.powf(1.0 + p);
    k * integrate_adaptive(g, r0, r1, WEIGHT_TOL / k)
}

/// Exponent p = dσ − 2 together with the per-step weights of a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWeights {
    exponent: f64,
    weights: Vec<f64>,
}

impl StepWeights {
    /// Weights W_n = ∫_{t_n}^{t_{n+1}} (cos s)^p ds for consecutive grid times.
    pub fn for_grid(exponent: f64, times: &[f64]) -> Result<Self> {
        let weights = times
            .windows(2)
            .map(|w| cosine_weight(w[0], w[1] - w[0], exponent))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { exponent, weights })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_to_degree_23_and_gauss_to_13() {
        // 7-point Gauss base: Kronrod extension is exact through 3·7 + 2
        for deg in 0..24 {
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let (k, diff) = gk15(&|x: f64| x.powi(deg), -1.0, 1.0);
            assert!((k - exact).abs() < 1e-14, "deg {deg}: {k}");
            if deg <= 13 {
                assert!(diff < 1e-14, "gauss deg {deg}: {diff}");
            }
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }
}

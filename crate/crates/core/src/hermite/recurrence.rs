//! Scaled three-term recurrence for the L²-normalised Hermite functions
//!
//! ψ₀(x) = π^{-1/4} e^{-x²/2},  ψ₁(x) = √2 x ψ₀(x),
//! ψ_{k+1}(x) = √(2/(k+1)) x ψ_k(x) − √(k/(k+1)) ψ_{k−1}(x).
//!
//! The Gaussian envelope underflows long before the polynomial part stops
//! growing (|x| ~ 40 already gives e^{-800}), so the recurrence is carried on
//! mantissas with a separate natural-log scale. Every returned value is
//! `mantissa * exp(scale)`, evaluated only once the scale is representable.

const RESCALE_LOG2: i32 = 256;
const RESCALE_THRESHOLD: f64 = 1.157_920_892_373_162e77; // 2^256
const LN_PI_QUARTER: f64 = 0.286_182_471_462_350_04; // ln(π)/4

#[inline]
fn rescale_factor() -> f64 {
    2f64.powi(-RESCALE_LOG2)
}

#[inline]
fn rescale_log() -> f64 {
    RESCALE_LOG2 as f64 * std::f64::consts::LN_2
}

/// Writes ψ_m(x)·exp(log_offset) for m = 0..out.len() into `out`.
pub(crate) fn hermite_functions_into(x: f64, log_offset: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let mut log_scale = -0.5 * x * x - LN_PI_QUARTER + log_offset;
    let mut scale = log_scale.exp();
    let mut prev = 1.0_f64;
    out[0] = prev * scale;
    if n == 1 {
        return;
    }
    let mut cur = std::f64::consts::SQRT_2 * x;
    out[1] = cur * scale;
    for k in 1..n - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            let f = rescale_factor();
            cur *= f;
            prev *= f;
            log_scale += rescale_log();
            scale = log_scale.exp();
        }
        out[k + 1] = cur * scale;
    }
}

/// Mantissas of (ψ_{n−1}(x), ψ_n(x)) and their shared log-scale, n ≥ 1.
fn top_pair(n: usize, x: f64) -> (f64, f64, f64) {
    debug_assert!(n >= 1);
    let mut log_scale = -0.5 * x * x - LN_PI_QUARTER;
    let mut prev = 1.0_f64;
    let mut cur = std::f64::consts::SQRT_2 * x;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_THRESHOLD {
            let f = rescale_factor();
            cur *= f;
            prev *= f;
            log_scale += rescale_log();
        }
    }
    (prev, cur, log_scale)
}

/// ln|ψ_n(x)|.
pub(crate) fn log_abs_hermite_function(n: usize, x: f64) -> f64 {
    if n == 0 {
        return -0.5 * x * x - LN_PI_QUARTER;
    }
    let (_, psi_n, log_scale) = top_pair(n, x);
    psi_n.abs().ln() + log_scale
}

/// ψ_n(x) / ψ_{n−1}(x) for n ≥ 1; the scale cancels.
pub(crate) fn hermite_ratio(n: usize, x: f64) -> f64 {
    debug_assert!(n >= 1);
    let (psi_nm1, psi_n, _) = top_pair(n, x);
    psi_n / psi_nm1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(n: usize, x: f64) -> Vec<f64> {
        // unscaled recurrence, valid for small n and |x|
        let mut v = vec![0.0; n];
        v[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        if n > 1 {
            v[1] = std::f64::consts::SQRT_2 * x * v[0];
        }
        for k in 1..n.saturating_sub(1) {
            let kf = k as f64;
            v[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * v[k] - (kf / (kf + 1.0)).sqrt() * v[k - 1];
        }
        v
    }

    #[test]
    fn matches_unscaled_recurrence_for_moderate_arguments() {
        for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5, 6.0] {
            let mut out = vec![0.0; 40];
            hermite_functions_into(x, 0.0, &mut out);
            let reference = direct(40, x);
            for (a, b) in out.iter().zip(&reference) {
                assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn log_abs_and_ratio_are_consistent() {
        let mut out = vec![0.0; 30];
        hermite_functions_into(1.3, 0.0, &mut out);
        let l = log_abs_hermite_function(29, 1.3);
        assert!((l - out[29].abs().ln()).abs() < 1e-12);
        let r = hermite_ratio(29, 1.3);
        assert!((r - out[29] / out[28]).abs() < 1e-10 * r.abs().max(1.0));
        assert!((log_abs_hermite_function(0, 2.0) - out_first(2.0).ln()).abs() < 1e-15);
    }

    fn out_first(x: f64) -> f64 {
        std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp()
    }

    #[test]
    fn far_tail_stays_finite() {
        let mut out = vec![0.0; 4096];
        hermite_functions_into(85.0, 0.0, &mut out);
        assert!(out.iter().all(|v| v.is_finite()));
        assert!(out[4095].abs() > 0.0);
        assert!(log_abs_hermite_function(16383, 180.0).is_finite());
    }
}

//! Value ↔ coefficient transforms on the Gauss–Hermite grid.
//!
//! With q_k² = w_k e^{x_k²} the matrix Q_{mk} = ψ_m(x_k) q_k is orthogonal,
//! so analysis is c = Q (q ∘ f) and synthesis is f = (Qᵀ c) / q. Each entry
//! is produced by the scaled recurrence with log-offset ln q_k, and because
//! q_k = 1/(√M |ψ_{M−1}(x_k)|) no entry ever exceeds one in magnitude.
//!
//! Node symmetry gives Q_{m,M−1−k} = (−1)^m Q_{mk}, so only half of the
//! columns are kept, split by the parity of m.

use num_complex::Complex64;

use super::quadrature::QuadratureRule;
use super::recurrence::{hermite_functions_into, log_abs_hermite_function};
use super::SpectralField;
use crate::error::{Error, Result};

/// Above this size columns are regenerated on every transform instead of
/// being stored (a dense half matrix at M = 8192 would take 256 MiB).
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub struct TransformPlan {
    rule: QuadratureRule,
    log_q: Vec<f64>,
    q: Vec<f64>,
    /// Per stored column k < ⌈M/2⌉: even-m entries then odd-m entries.
    columns: Option<Vec<f64>>,
}

impl TransformPlan {
    pub fn new(m: usize) -> Result<Self> {
        Self::with_storage(m, m <= DENSE_LIMIT)
    }

    /// Forces dense (`true`) or matrix-free (`false`) evaluation.
    pub fn with_storage(m: usize, dense: bool) -> Result<Self> {
        let rule = QuadratureRule::new(m)?;
        Ok(Self::from_rule(rule, dense))
    }

    pub fn from_rule(rule: QuadratureRule, dense: bool) -> Self {
        let m = rule.len();
        let half_ln_m = 0.5 * (m as f64).ln();
        let log_q: Vec<f64> = rule
            .nodes()
            .iter()
            .map(|&x| -half_ln_m - log_abs_hermite_function(m - 1, x))
            .collect();
        let q = log_q.iter().map(|l| l.exp()).collect();
        let mut plan = Self {
            rule,
            log_q,
            q,
            columns: None,
        };
        if dense {
            let half = plan.half();
            let mut storage = vec![0.0; half * m];
            let mut buf = vec![0.0; m];
            for k in 0..half {
                plan.fill_column(k, &mut buf, &mut storage[k * m..(k + 1) * m]);
            }
            plan.columns = Some(storage);
        }
        plan
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    /// √(w_k e^{x_k²}); q_k² is the weight of ∫ f dx at node k.
    pub fn node_scale(&self) -> &[f64] {
        &self.q
    }

    pub fn is_dense(&self) -> bool {
        self.columns.is_some()
    }

    fn half(&self) -> usize {
        self.len().div_ceil(2)
    }

    /// Column k of Q, reordered as [even m | odd m].
    fn fill_column(&self, k: usize, buf: &mut [f64], out: &mut [f64]) {
        let m = self.len();
        let x = self.rule.nodes()[k];
        hermite_functions_into(x, self.log_q[k], buf);
        let n_even = m.div_ceil(2);
        for (j, slot) in out[..n_even].iter_mut().enumerate() {
            *slot = buf[2 * j];
        }
        for (j, slot) in out[n_even..].iter_mut().enumerate() {
            *slot = buf[2 * j + 1];
        }
    }

    fn for_each_column(&self, mut f: impl FnMut(usize, &[f64])) {
        let m = self.len();
        match &self.columns {
            Some(storage) => {
                for k in 0..self.half() {
                    f(k, &storage[k * m..(k + 1) * m]);
                }
            }
            None => {
                let mut buf = vec![0.0; m];
                let mut col = vec![0.0; m];
                for k in 0..self.half() {
                    self.fill_column(k, &mut buf, &mut col);
                    f(k, &col);
                }
            }
        }
    }

    /// Node values → Hermite coefficients, without validation.
    pub fn analyze_into(&self, values: &[Complex64], coeffs: &mut [Complex64]) {
        let m = self.len();
        debug_assert_eq!(values.len(), m);
        debug_assert_eq!(coeffs.len(), m);
        let n_even = m.div_ceil(2);
        let n_odd = m / 2;
        let mut even_re = vec![0.0; n_even];
        let mut even_im = vec![0.0; n_even];
        let mut odd_re = vec![0.0; n_odd];
        let mut odd_im = vec![0.0; n_odd];
        self.for_each_column(|k, col| {
            let mirror = m - 1 - k;
            let a = values[k] * self.q[k];
            let (sum, diff) = if mirror == k {
                (a, Complex64::new(0.0, 0.0))
            } else {
                let b = values[mirror] * self.q[mirror];
                (a + b, a - b)
            };
            axpy2(&col[..n_even], sum, &mut even_re, &mut even_im);
            axpy2(&col[n_even..], diff, &mut odd_re, &mut odd_im);
        });
        for j in 0..n_even {
            coeffs[2 * j] = Complex64::new(even_re[j], even_im[j]);
        }
        for j in 0..n_odd {
            coeffs[2 * j + 1] = Complex64::new(odd_re[j], odd_im[j]);
        }
    }

    /// Hermite coefficients → node values, without validation.
    pub fn synthesize_into(&self, coeffs: &[Complex64], values: &mut [Complex64]) {
        let m = self.len();
        debug_assert_eq!(values.len(), m);
        debug_assert_eq!(coeffs.len(), m);
        let n_even = m.div_ceil(2);
        let even_re: Vec<f64> = coeffs.iter().step_by(2).map(|c| c.re).collect();
        let even_im: Vec<f64> = coeffs.iter().step_by(2).map(|c| c.im).collect();
        let odd_re: Vec<f64> = coeffs.iter().skip(1).step_by(2).map(|c| c.re).collect();
        let odd_im: Vec<f64> = coeffs.iter().skip(1).step_by(2).map(|c| c.im).collect();
        self.for_each_column(|k, col| {
            let (er, ei) = dot2(&col[..n_even], &even_re, &even_im);
            let (or, oi) = dot2(&col[n_even..], &odd_re, &odd_im);
            let even = Complex64::new(er, ei);
            let odd = Complex64::new(or, oi);
            let mirror = m - 1 - k;
            values[k] = (even + odd) / self.q[k];
            if mirror != k {
                values[mirror] = (even - odd) / self.q[mirror];
            }
        });
    }

    /// [`synthesize_into`](Self::synthesize_into) for several coefficient
    /// vectors at once; each stored column is read once for the whole batch.
    pub fn synthesize_batch(&self, coeffs: &[&[Complex64]], values: &mut [Vec<Complex64>]) {
        let m = self.len();
        debug_assert_eq!(coeffs.len(), values.len());
        let n_even = m.div_ceil(2);
        let split: Vec<[Vec<f64>; 4]> = coeffs
            .iter()
            .map(|c| {
                [
                    c.iter().step_by(2).map(|z| z.re).collect(),
                    c.iter().step_by(2).map(|z| z.im).collect(),
                    c.iter().skip(1).step_by(2).map(|z| z.re).collect(),
                    c.iter().skip(1).step_by(2).map(|z| z.im).collect(),
                ]
            })
            .collect();
        self.for_each_column(|k, col| {
            let mirror = m - 1 - k;
            for (parts, out) in split.iter().zip(values.iter_mut()) {
                let (er, ei) = dot2(&col[..n_even], &parts[0], &parts[1]);
                let (or, oi) = dot2(&col[n_even..], &parts[2], &parts[3]);
                let even = Complex64::new(er, ei);
                let odd = Complex64::new(or, oi);
                out[k] = (even + odd) / self.q[k];
                if mirror != k {
                    out[mirror] = (even - odd) / self.q[mirror];
                }
            }
        });
    }

    /// Batched [`analyze_into`](Self::analyze_into).
    pub fn analyze_batch(&self, values: &[&[Complex64]], coeffs: &mut [Vec<Complex64>]) {
        let m = self.len();
        debug_assert_eq!(coeffs.len(), values.len());
        let n_even = m.div_ceil(2);
        let n_odd = m / 2;
        let mut acc: Vec<[Vec<f64>; 4]> = values
            .iter()
            .map(|_| [vec![0.0; n_even], vec![0.0; n_even], vec![0.0; n_odd], vec![0.0; n_odd]])
            .collect();
        self.for_each_column(|k, col| {
            let mirror = m - 1 - k;
            for (v, a) in values.iter().zip(acc.iter_mut()) {
                let x = v[k] * self.q[k];
                let (sum, diff) = if mirror == k {
                    (x, Complex64::new(0.0, 0.0))
                } else {
                    let y = v[mirror] * self.q[mirror];
                    (x + y, x - y)
                };
                let [er, ei, or, oi] = a;
                axpy2(&col[..n_even], sum, er, ei);
                axpy2(&col[n_even..], diff, or, oi);
            }
        });
        for (a, out) in acc.iter().zip(coeffs.iter_mut()) {
            for j in 0..n_even {
                out[2 * j] = Complex64::new(a[0][j], a[1][j]);
            }
            for j in 0..n_odd {
                out[2 * j + 1] = Complex64::new(a[2][j], a[3][j]);
            }
        }
    }

    pub fn analyze(&self, values: &[Complex64]) -> Result<SpectralField> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite node value"));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.len()];
        self.analyze_into(values, &mut coeffs);
        Ok(SpectralField::new(coeffs))
    }

    pub fn synthesize(&self, field: &SpectralField) -> Result<Vec<Complex64>> {
        if field.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: field.len(),
            });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); self.len()];
        self.synthesize_into(field.coeffs(), &mut values);
        Ok(values)
    }

    /// Samples a function at the nodes and projects it onto the basis.
    pub fn project(&self, f: impl Fn(f64) -> Complex64) -> Result<SpectralField> {
        let values: Vec<Complex64> = self.nodes().iter().map(|&x| f(x)).collect();
        self.analyze(&values)
    }

    /// ∫ g(x) dx ≈ Σ_k q_k² g(x_k) for node samples g.
    pub fn integrate_nodal(&self, samples: impl Iterator<Item = f64>) -> f64 {
        self.q.iter().zip(samples).map(|(q, g)| q * q * g).sum()
    }
}

/// Σ_m α_m ψ_m(x) at arbitrary points.
pub fn evaluate_at(field: &SpectralField, points: &[f64]) -> Vec<Complex64> {
    let mut basis = vec![0.0; field.len()];
    points
        .iter()
        .map(|&x| {
            hermite_functions_into(x, 0.0, &mut basis);
            basis
                .iter()
                .zip(field.coeffs())
                .map(|(b, c)| c * b)
                .sum::<Complex64>()
        })
        .collect()
}

/// (Σ_k q_k² |f(x_k)|^p)^{1/p}.
pub fn lp_norm(field: &SpectralField, p: f64, plan: &TransformPlan) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("Lp exponent must be finite and ≥ 1, got {p}")));
    }
    let values = plan.synthesize(field)?;
    Ok(lp_norm_of_values(&values, p, plan))
}

pub(crate) fn lp_norm_of_values(values: &[Complex64], p: f64, plan: &TransformPlan) -> f64 {
    let total: f64 = values
        .iter()
        .zip(plan.log_q.iter())
        .filter_map(|(v, lq)| {
            let a = v.norm();
            if a == 0.0 {
                return None;
            }
            // log-space so that q_k² |f|^p neither overflows nor loses range
            let term = (2.0 * lq + p * a.ln()).exp();
            Some(term)
        })
        .sum();
    total.powf(1.0 / p)
}

// The two kernels below carry nearly all of the run time. They are plain
// loops written for auto-vectorisation, compiled a second time with AVX2+FMA
// enabled and picked at run time when the CPU has them.

#[inline(always)]
fn axpy2_body(col: &[f64], a: Complex64, re: &mut [f64], im: &mut [f64]) {
    for ((c, r), i) in col.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
        *r += c * a.re;
        *i += c * a.im;
    }
}

#[inline(always)]
fn dot2_body(col: &[f64], re: &[f64], im: &[f64]) -> (f64, f64) {
    const LANES: usize = 8;
    let mut acc_re = [0.0; LANES];
    let mut acc_im = [0.0; LANES];
    let n = col.len().min(re.len()).min(im.len());
    let (col, re, im) = (&col[..n], &re[..n], &im[..n]);
    let tail = n - n % LANES;
    for ((c, r), i) in col
        .chunks_exact(LANES)
        .zip(re.chunks_exact(LANES))
        .zip(im.chunks_exact(LANES))
    {
        for l in 0..LANES {
            acc_re[l] += c[l] * r[l];
            acc_im[l] += c[l] * i[l];
        }
    }
    let mut sr: f64 = acc_re.iter().sum();
    let mut si: f64 = acc_im.iter().sum();
    for j in tail..n {
        sr += col[j] * re[j];
        si += col[j] * im[j];
    }
    (sr, si)
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use super::*;

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn axpy2(col: &[f64], a: Complex64, re: &mut [f64], im: &mut [f64]) {
        axpy2_body(col, a, re, im)
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn dot2(col: &[f64], re: &[f64], im: &[f64]) -> (f64, f64) {
        dot2_body(col, re, im)
    }

    pub(super) fn available() -> bool {
        std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma")
    }
}

#[inline]
fn axpy2(col: &[f64], a: Complex64, re: &mut [f64], im: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if simd::available() {
        // SAFETY: the CPU supports the enabled features.
        return unsafe { simd::axpy2(col, a, re, im) };
    }
    axpy2_body(col, a, re, im)
}

#[inline]
fn dot2(col: &[f64], re: &[f64], im: &[f64]) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if simd::available() {
        // SAFETY: as above.
        return unsafe { simd::dot2(col, re, im) };
    }
    dot2_body(col, re, im)
}

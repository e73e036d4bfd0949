//! Gauss–Hermite quadrature for the weight e^{-x²}.
//!
//! Nodes are the eigenvalues of the Jacobi matrix of the orthonormal Hermite
//! polynomials (zero diagonal, off-diagonal √(k/2)), found by implicit QL
//! without eigenvectors, then polished by Newton steps on the scaled
//! recurrence. Weights come from the Christoffel–Darboux identity
//! w_k = 1 / (M p_{M−1}(x_k)²), evaluated in log space, so they stay exact
//! long after e^{-x_k²} has underflowed.

use super::recurrence::{hermite_ratio, log_abs_hermite_function};
use crate::error::{Error, Result};

/// Largest supported number of nodes.
pub const MAX_NODES: usize = 16384;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    log_scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_NODES {
            return Err(Error::invalid(format!(
                "quadrature size must lie in 1..={MAX_NODES}, got {m}"
            )));
        }
        let mut nodes = jacobi_eigenvalues(m)?;
        for x in nodes.iter_mut() {
            *x = newton_polish(m, *x);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        symmetrize(&mut nodes);

        let ln_m = (m as f64).ln();
        let log_weights: Vec<f64> = nodes
            .iter()
            .map(|&x| -x * x - ln_m - 2.0 * log_abs_hermite_function(m - 1, x))
            .collect();
        let weights = log_weights.iter().map(|l| l.exp()).collect();
        let log_scaled_weights = log_weights
            .iter()
            .zip(&nodes)
            .map(|(l, x)| l + 0.5 * x * x)
            .collect();
        Ok(Self {
            nodes,
            weights,
            log_weights,
            log_scaled_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ascending nodes x₀ < … < x_{M−1}.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for ∫ g(x) e^{-x²} dx. Entries may underflow to zero for large M;
    /// use [`log_weights`](Self::log_weights) when that matters.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// log(w_k) + x_k²/2: the log of the factor multiplying f(x_k)H_m(x_k) in
    /// the value→coefficient transform.
    pub fn log_scaled_weights(&self) -> &[f64] {
        &self.log_scaled_weights
    }

    /// Σ_k w_k g(x_k) ≈ ∫ g(x) e^{-x²} dx.
    pub fn integrate_weighted(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    /// Σ_k w_k e^{x_k²} f(x_k) ≈ ∫ f(x) dx for f decaying like a Gaussian.
    pub fn integrate_unweighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&x, &lw)| (lw + x * x).exp() * f(x))
            .sum()
    }
}

fn jacobi_eigenvalues(m: usize) -> Result<Vec<f64>> {
    let mut diag = vec![0.0_f64; m];
    let mut off: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    tridiagonal_ql(&mut diag, &mut off)?;
    Ok(diag)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues only.
/// `off[i]` couples rows i and i+1, the last entry is ignored.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: e[l].abs(),
                    reason: "tridiagonal QL iteration".into(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Newton on p_M using p_M' = √(2M) p_{M−1}, so the update is a ratio of
/// consecutive Hermite functions and never sees the Gaussian envelope.
fn newton_polish(m: usize, mut x: f64) -> f64 {
    let scale = (2.0 * m as f64).sqrt();
    for _ in 0..8 {
        let step = hermite_ratio(m, x) / scale;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len();
    for k in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        nodes[k] = -a;
        nodes[n - 1 - k] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn rejects_out_of_range_sizes() {
        assert!(QuadratureRule::new(0).is_err());
        assert!(QuadratureRule::new(MAX_NODES + 1).is_err());
    }

    #[test]
    fn one_node_rule() {
        let r = QuadratureRule::new(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn two_node_rule_matches_closed_form() {
        // roots of 4x² − 2, weights fixed by exactness on 1 and x²
        let r = QuadratureRule::new(2).unwrap();
        let x = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.nodes()[0] + x).abs() < 1e-15);
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        for w in r.weights() {
            assert!((w - SQRT_PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn second_moment_at_m64() {
        let r = QuadratureRule::new(64).unwrap();
        let value = r.integrate_weighted(|x| x * x);
        assert!((value - SQRT_PI / 2.0).abs() < 1e-12 * SQRT_PI);
    }

    #[test]
    fn symmetric_positive_and_normalised() {
        for m in [3, 8, 17, 64, 200, 513, 1024] {
            let r = QuadratureRule::new(m).unwrap();
            let x = r.nodes();
            for k in 0..m {
                assert!((x[k] + x[m - 1 - k]).abs() < 1e-13);
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            if m <= 200 {
                assert!(r.weights().iter().all(|&w| w > 0.0));
            }
            let total: f64 = r.weights().iter().sum();
            assert!((total - SQRT_PI).abs() < 1e-12 * SQRT_PI, "m={m}: {total}");
        }
    }

    #[test]
    fn exact_for_monomials_up_to_degree_2m_minus_1() {
        // ∫ x^{2j} e^{-x²} = Γ(j + 1/2)
        for m in [1usize, 2, 5, 12, 20, 32] {
            let r = QuadratureRule::new(m).unwrap();
            let mut gamma_half = SQRT_PI; // Γ(1/2)
            for deg in 0..(2 * m) {
                let value = r.integrate_weighted(|x| x.powi(deg as i32));
                if deg % 2 == 1 {
                    assert!(value.abs() < 1e-12 * gamma_half.max(1.0), "m={m} deg={deg}");
                } else {
                    let j = deg / 2;
                    if j > 0 {
                        gamma_half *= j as f64 - 0.5;
                    }
                    let rel = (value - gamma_half).abs() / gamma_half;
                    assert!(rel < 1e-12, "m={m} deg={deg} rel={rel:e}");
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(QuadratureRule::new(77).unwrap(), QuadratureRule::new(77).unwrap());
    }

    #[test]
    fn large_rule_weights_remain_finite_in_log_space() {
        let r = QuadratureRule::new(4096).unwrap();
        assert!(r.log_weights().iter().all(|l| l.is_finite()));
        let last = *r.nodes().last().unwrap();
        // largest zero of the degree-M Hermite polynomial sits just below √(2M+1)
        assert!(last < (2.0 * 4096.0 + 1.0_f64).sqrt() && last > 85.0);
    }
}

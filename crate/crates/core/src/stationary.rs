//! Rotating points of the scattering map.
//!
//! A solitary solution v(t) = e^{−iνt}ψ of the lens equation at σ = 2/d with
//! Hψ + |ψ|^{2σ}ψ = νψ scatters to S(u₋) = e^{iθ}u₋ whenever
//! ν = d/2 − θ/π + 2j. The elliptic problem is solved for ψ real and even
//! by Newton's method on the even Hermite coefficients; the scattering-side
//! refinement works directly on the residual of S.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{eigenvalue, SpectralField, TransformPlan};
use crate::lens_map::{asymptotic_of_start, scatter_with, ScatterConfig};
use crate::parallel::map_range;
use crate::state::{AsymptoticState, LensState, Nonlinearity, Side};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// ν = d/2 − θ/π + 2j.
pub fn nu_from_theta(j: u32, theta: f64, d: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::invalid("j must be at least 1"));
    }
    Ok(d as f64 / 2.0 - theta / PI + 2.0 * j as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatingPointSpec {
    pub j: u32,
    pub theta: f64,
    pub d: usize,
    pub sigma: f64,
    pub nu: f64,
}

impl RotatingPointSpec {
    pub fn new(j: u32, theta: f64, sigma: f64) -> Result<Self> {
        let d = 1;
        let nu = nu_from_theta(j, theta, d)?;
        if !(nu > d as f64 / 2.0) {
            return Err(Error::Domain(format!(
                "ν = {nu} must exceed d/2 = {} (θ = {theta}, j = {j})",
                d as f64 / 2.0
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { j, theta, d, sigma, nu })
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub nonlinearity: Nonlinearity,
    /// Multiplies the nonlinearity.
    pub coupling: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 200,
            nonlinearity: Nonlinearity::Defocusing,
            coupling: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySolution {
    pub spec: RotatingPointSpec,
    pub psi: SpectralField,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// JSON layout of a saved solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryRecord {
    pub j: u32,
    pub theta: f64,
    pub sigma: f64,
    pub nu: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub residual: f64,
    pub coeffs_re: Vec<f64>,
    pub coeffs_im: Vec<f64>,
}

impl StationarySolution {
    pub fn nu(&self) -> f64 {
        self.spec.nu
    }

    pub fn record(&self) -> StationaryRecord {
        StationaryRecord {
            j: self.spec.j,
            theta: self.spec.theta,
            sigma: self.spec.sigma,
            nu: self.spec.nu,
            m: self.psi.len(),
            residual: self.residual_norm,
            coeffs_re: self.psi.coeffs().iter().map(|c| c.re).collect(),
            coeffs_im: self.psi.coeffs().iter().map(|c| c.im).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.record())?)
    }

    pub fn from_record(rec: &StationaryRecord) -> Result<Self> {
        if rec.coeffs_re.len() != rec.m || rec.coeffs_im.len() != rec.m {
            return Err(Error::DimensionMismatch {
                expected: rec.m,
                got: rec.coeffs_re.len(),
            });
        }
        let spec = RotatingPointSpec::new(rec.j, rec.theta, rec.sigma)?;
        let psi = SpectralField::new(
            rec.coeffs_re
                .iter()
                .zip(&rec.coeffs_im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        );
        Ok(Self {
            spec,
            psi,
            residual_norm: rec.residual,
            iterations: 0,
        })
    }

    /// The lens state e^{iνπ/2}ψ at t = −π/2 of the solitary solution.
    pub fn lens_start(&self) -> LensState {
        LensState {
            field: self.psi.scaled(Complex64::cis(self.spec.nu * PI / 2.0)),
            t_lens: -PI / 2.0,
        }
    }

    /// The asymptotic state u₋ whose image under S is e^{iθ}u₋.
    pub fn u_minus(&self) -> AsymptoticState {
        asymptotic_of_start(&self.lens_start())
    }
}

/// Residual machinery on the even real subspace.
struct EvenProblem<'a> {
    plan: &'a TransformPlan,
    shift: Vec<f64>,
    sigma: f64,
    strength: f64,
}

impl<'a> EvenProblem<'a> {
    fn new(spec: &RotatingPointSpec, opts: &SolverOptions, plan: &'a TransformPlan) -> Self {
        let m = plan.len();
        let shift = (0..m).map(|k| eigenvalue(k, spec.d) - spec.nu).collect();
        Self {
            plan,
            shift,
            sigma: spec.sigma,
            strength: opts.nonlinearity.sign() * opts.coupling,
        }
    }

    fn n_even(&self) -> usize {
        self.plan.len().div_ceil(2)
    }

    fn expand(&self, b: &[f64]) -> Vec<Complex64> {
        let mut full = vec![ZERO; self.plan.len()];
        for (j, &v) in b.iter().enumerate() {
            full[2 * j] = Complex64::new(v, 0.0);
        }
        full
    }

    /// Full residual R_m = (λ_m − ν)β_m + s[|ψ|^{2σ}ψ]_m, plus node values of ψ.
    fn residual(&self, b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let m = self.plan.len();
        let beta = self.expand(b);
        let mut values = vec![ZERO; m];
        self.plan.synthesize_into(&beta, &mut values);
        let nl: Vec<Complex64> = values
            .iter()
            .map(|v| v * (self.strength * v.norm_sqr().powf(self.sigma)))
            .collect();
        let mut r = vec![ZERO; m];
        self.plan.analyze_into(&nl, &mut r);
        for k in 0..m {
            r[k] += beta[k] * self.shift[k];
        }
        (r, values)
    }

    fn even_part(r: &[Complex64]) -> DVector<f64> {
        DVector::from_iterator(r.len().div_ceil(2), r.iter().step_by(2).map(|c| c.re))
    }

    /// ∂R_{2i}/∂β_{2j} = (λ − ν)δ_ij + s(2σ+1)∫|ψ|^{2σ} ψ_{2i} ψ_{2j}.
    fn jacobian(&self, values: &[Complex64]) -> DMatrix<f64> {
        let m = self.plan.len();
        let n = self.n_even();
        let weight: Vec<f64> = values
            .iter()
            .map(|v| self.strength * (2.0 * self.sigma + 1.0) * v.norm_sqr().powf(self.sigma))
            .collect();
        let columns = map_range(n, |j| {
            let mut e = vec![ZERO; m];
            e[2 * j] = Complex64::new(1.0, 0.0);
            let mut phi = vec![ZERO; m];
            self.plan.synthesize_into(&e, &mut phi);
            for (p, w) in phi.iter_mut().zip(&weight) {
                *p *= *w;
            }
            let mut col = vec![ZERO; m];
            self.plan.analyze_into(&phi, &mut col);
            col.iter().step_by(2).map(|c| c.re).collect::<Vec<f64>>()
        });
        let mut jac = DMatrix::zeros(n, n);
        for (j, col) in columns.iter().enumerate() {
            for i in 0..n {
                jac[(i, j)] = col[i];
            }
            jac[(j, j)] += self.shift[2 * j];
        }
        jac
    }
}

fn norm(r: &[Complex64]) -> f64 {
    r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// c·ψ₀ with c fixed by projecting the equation onto ψ₀:
/// (λ₀ − ν) + s·c^{2σ} ∫ψ₀^{2σ+2} = 0.
pub fn gaussian_init(spec: &RotatingPointSpec, m: usize, nonlinearity: Nonlinearity) -> Result<SpectralField> {
    let s = spec.sigma;
    let integral = PI.powf(-(s + 1.0) / 2.0) * (PI / (s + 1.0)).sqrt();
    let ratio = (spec.nu - eigenvalue(0, spec.d)) / (nonlinearity.sign() * integral);
    if !(ratio > 0.0) {
        return Err(Error::Domain(format!(
            "no Gaussian balance for ν = {} with a {:?} nonlinearity",
            spec.nu, nonlinearity
        )));
    }
    let c = ratio.powf(1.0 / (2.0 * s));
    let mut init = SpectralField::zeros(m);
    init.coeffs_mut()[0] = Complex64::new(c, 0.0);
    Ok(init)
}

/// Solves Hψ + s|ψ|^{2σ}ψ = νψ with M modes from a real even start.
pub fn solve_stationary(spec: &RotatingPointSpec, m: usize, init: &SpectralField, opts: &SolverOptions) -> Result<StationarySolution> {
    let plan = TransformPlan::new(m)?;
    solve_stationary_with(spec, init, opts, &plan)
}

pub fn solve_stationary_with(
    spec: &RotatingPointSpec,
    init: &SpectralField,
    opts: &SolverOptions,
    plan: &TransformPlan,
) -> Result<StationarySolution> {
    let m = plan.len();
    let init = resize(init, m);
    if init.coeffs().iter().all(|c| *c == ZERO) {
        return Err(Error::invalid("initial guess must be nonzero"));
    }
    let scale = init.l2_norm();
    let asym = init
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 1 { c.norm() } else { c.im.abs() })
        .fold(0.0, f64::max);
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::invalid("initial guess must be real and even"));
    }
    let problem = EvenProblem::new(spec, opts, plan);
    let mut b: Vec<f64> = init.coeffs().iter().step_by(2).map(|c| c.re).collect();
    let (mut r, mut values) = problem.residual(&b);
    let mut res = norm(&r);
    let mut iterations = 0;
    while res > opts.tol {
        if iterations >= opts.max_iters {
            return Err(Error::NonConvergence {
                iterations,
                residual: res,
                reason: format!("stationary Newton solve (ν = {}, σ = {})", spec.nu, spec.sigma),
            });
        }
        iterations += 1;
        let jac = problem.jacobian(&values);
        let rhs = -EvenProblem::even_part(&r);
        let lu = jac.lu();
        let diag = lu.u().diagonal();
        let (dmin, dmax) = diag
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
        let delta = match lu.solve(&rhs) {
            Some(d) if dmin > 1e-14 * dmax && d.iter().all(|v| v.is_finite()) => d,
            _ => {
                return Err(Error::SingularJacobian(format!(
                    "ν = {} sits on or near a linearised eigenvalue; try another initial guess or ν",
                    spec.nu
                )))
            }
        };
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = b.iter().zip(delta.iter()).map(|(x, d)| x + step * d).collect();
            let (rt, vt) = problem.residual(&trial);
            let rn = norm(&rt);
            if rn < (1.0 - 1e-4 * step) * res || step < 1e-8 {
                b = trial;
                r = rt;
                values = vt;
                res = rn;
                break;
            }
            step *= 0.5;
        }
    }
    Ok(StationarySolution {
        spec: *spec,
        psi: SpectralField::new(problem.expand(&b)),
        residual_norm: res,
        iterations,
    })
}

fn resize(field: &SpectralField, m: usize) -> SpectralField {
    let mut c = field.coeffs().to_vec();
    c.resize(m, ZERO);
    SpectralField::new(c)
}

/// Residual norm of the elliptic equation for a given ψ.
pub fn stationary_residual(spec: &RotatingPointSpec, psi: &SpectralField, opts: &SolverOptions, plan: &TransformPlan) -> Result<f64> {
    if psi.len() != plan.len() {
        return Err(Error::DimensionMismatch {
            expected: plan.len(),
            got: psi.len(),
        });
    }
    let m = plan.len();
    let mut values = vec![ZERO; m];
    plan.synthesize_into(psi.coeffs(), &mut values);
    let strength = opts.nonlinearity.sign() * opts.coupling;
    let nl: Vec<Complex64> = values
        .iter()
        .map(|v| v * (strength * v.norm_sqr().powf(spec.sigma)))
        .collect();
    let mut r = vec![ZERO; m];
    plan.analyze_into(&nl, &mut r);
    for (k, rk) in r.iter_mut().enumerate() {
        *rk += psi.coeffs()[k] * (eigenvalue(k, spec.d) - spec.nu);
    }
    Ok(norm(&r))
}

/// Path-follows the solution from base.spec.sigma to `sigma_target` in
/// `steps` equal increments.
pub fn continue_in_sigma(base: &StationarySolution, sigma_target: f64, steps: usize, opts: &SolverOptions) -> Result<StationarySolution> {
    if steps == 0 || sigma_target == base.spec.sigma {
        return Ok(base.clone());
    }
    let plan = TransformPlan::new(base.psi.len())?;
    let s0 = base.spec.sigma;
    let mut current = base.clone();
    for k in 1..=steps {
        let sigma = s0 + (sigma_target - s0) * k as f64 / steps as f64;
        let spec = base.spec.with_sigma(sigma);
        current = solve_stationary_with(&spec, &current.psi, opts, &plan).map_err(|e| match e {
            Error::NonConvergence { iterations, residual, .. } => Error::NonConvergence {
                iterations,
                residual,
                reason: format!("continuation failed at σ = {sigma}"),
            },
            other => other,
        })?;
        current.iterations = k;
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaFit {
    pub theta: f64,
    pub residual: f64,
    /// ⟨u₊, u₋⟩ vanished, so every θ is equally good.
    pub degenerate: bool,
}

/// Minimiser θ ∈ [0, 2π) of ‖u₊ − e^{iθ}u₋‖.
pub fn fit_theta(u_minus: &AsymptoticState, u_plus: &AsymptoticState) -> Result<ThetaFit> {
    let a = u_minus.field.l2_norm();
    if a == 0.0 {
        return Err(Error::invalid("fit_theta needs a nonzero u₋"));
    }
    let inner = u_plus.field.l2_inner(&u_minus.field)?;
    let b = u_plus.field.l2_norm();
    let degenerate = inner.norm() <= 1e-14 * a * b.max(f64::MIN_POSITIVE);
    let theta = if degenerate { 0.0 } else { inner.arg().rem_euclid(TAU) };
    let rotated = u_minus.field.scaled(Complex64::cis(theta));
    let residual = u_plus.field.distance(&rotated)?;
    Ok(ThetaFit {
        theta,
        residual,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub max_iters: usize,
    /// Stop once ‖S(u₋) − e^{iθ}u₋‖ falls below this.
    pub target: f64,
    /// Stop when an iteration improves the residual by less than this factor.
    pub stall: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iters: 20,
            target: 1e-12,
            stall: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineOutcome {
    pub alpha: SpectralField,
    pub theta: f64,
    pub residual: f64,
    pub initial_residual: f64,
    pub converged: bool,
    pub evaluations: usize,
    /// (iteration, residual) after each accepted step.
    pub log: Vec<(usize, f64)>,
}

/// Levenberg–Marquardt on F(α, θ) = S(α) − e^{iθ}α over the even complex
/// coefficients of α, at fixed ‖α‖ = ‖α_init‖ (zero is otherwise a trivial
/// minimiser). The Jacobian is taken by forward differences through the
/// full scattering pipeline.
pub fn refine_rotating_point(
    init_alpha: &SpectralField,
    init_theta: f64,
    cfg: &ScatterConfig,
    opts: &RefineOptions,
) -> Result<RefineOutcome> {
    cfg.validate()?;
    if init_alpha.len() != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: cfg.m,
            got: init_alpha.len(),
        });
    }
    let radius = init_alpha.l2_norm();
    if radius == 0.0 {
        return Err(Error::invalid("refinement needs a nonzero initial state"));
    }
    let plan = TransformPlan::new(cfg.m)?;
    let n_even = cfg.m.div_ceil(2);
    let n = 2 * n_even + 1;

    let to_alpha = |x: &[f64]| -> SpectralField {
        let norm = x[..2 * n_even].iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut c = vec![ZERO; cfg.m];
        for j in 0..n_even {
            c[2 * j] = Complex64::new(x[j], x[n_even + j]) * (radius / norm);
        }
        SpectralField::new(c)
    };
    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let alpha = to_alpha(x);
        let u = AsymptoticState {
            field: alpha.clone(),
            side: Side::Minus,
        };
        let u_plus = scatter_with(&u, cfg, &plan, None)?.u_plus;
        let rot = Complex64::cis(x[2 * n_even]);
        let mut f = Vec::with_capacity(2 * n_even);
        let diff: Vec<Complex64> = (0..n_even)
            .map(|j| u_plus.field.coeffs()[2 * j] - rot * alpha.coeffs()[2 * j])
            .collect();
        f.extend(diff.iter().map(|c| c.re));
        f.extend(diff.iter().map(|c| c.im));
        Ok(f)
    };
    let fnorm = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut x = vec![0.0; n];
    for j in 0..n_even {
        x[j] = init_alpha.coeffs()[2 * j].re;
        x[n_even + j] = init_alpha.coeffs()[2 * j].im;
    }
    x[2 * n_even] = init_theta;
    let mut f = eval(&x)?;
    let mut res = fnorm(&f);
    let initial_residual = res;
    let mut evaluations = 1;
    let mut log = vec![(0, res)];
    let mut mu = 1e-3;
    let h_coeff = 1e-7 * radius / (n_even as f64).sqrt();

    for iter in 1..=opts.max_iters {
        if res <= opts.target {
            break;
        }
        let columns = map_range(n, |i| {
            let mut xp = x.clone();
            let h = if i == 2 * n_even { 1e-7 } else { h_coeff };
            xp[i] += h;
            eval(&xp).map(|fp| fp.iter().zip(&f).map(|(a, b)| (a - b) / h).collect::<Vec<f64>>())
        });
        evaluations += n;
        let rows = f.len();
        let mut jac = DMatrix::zeros(rows, n);
        for (i, col) in columns.into_iter().enumerate() {
            let col = col?;
            for r in 0..rows {
                jac[(r, i)] = col[r];
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&f);
        let before = res;
        let mut accepted = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += mu * (jtj[(i, i)] + 1e-12);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 4.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let ft = eval(&trial)?;
            evaluations += 1;
            let rt = fnorm(&ft);
            if rt < res {
                x = trial;
                f = ft;
                res = rt;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        log.push((iter, res));
        if !accepted || res > before * (1.0 - opts.stall) {
            break;
        }
    }
    let alpha = to_alpha(&x);
    Ok(RefineOutcome {
        alpha,
        theta: x[2 * n_even].rem_euclid(TAU),
        residual: res,
        initial_residual,
        converged: res <= opts.target,
        evaluations,
        log,
    })
}

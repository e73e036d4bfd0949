//! One runner per experiment. Each returns a [`Report`]: a CSV table plus a
//! JSON summary of the headline numbers.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind};
use super::random::{gen_random_state, resized, scale_to_amplitude, RandomDataSpec, RandomKind};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, Propagator};
use crate::hermite::{evaluate_at, lp_norm, SpectralField, TransformPlan};
use crate::lens_map::{inject_minus, scatter_with, ScatterConfig};
use crate::observables::{
    growth_slope, invariants_of, lens_diagnostics, loglog_slope, moment_identity_gap, sigma_norm,
    DEFAULT_GROWTH_WINDOW,
};
use crate::parallel::map_range;
use crate::state::{AsymptoticState, LensState, Nonlinearity};
use crate::stationary::{
    continue_in_sigma, fit_theta, gaussian_init, refine_rotating_point, solve_stationary_with, RefineOptions,
    RotatingPointSpec, SolverOptions, StationarySolution,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub header: String,
    pub rows: Vec<String>,
    pub summary: Value,
}

impl Report {
    fn new(experiment: ExperimentKind, header: &str) -> Self {
        Self {
            experiment,
            header: header.to_string(),
            rows: Vec::new(),
            summary: Value::Null,
        }
    }

    fn push(&mut self, cells: &[f64]) {
        self.rows.push(cells.iter().map(|x| fmt_cell(*x)).collect::<Vec<_>>().join(","));
    }

    /// The table as CSV text, header first.
    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(self.header.len() + 1 + self.rows.len() * 64);
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

fn fmt_cell(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:.17e}")
    }
}

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    use ExperimentKind::*;
    match cfg.experiment {
        Visualize => run_visualize(cfg),
        Conservation => run_conservation(cfg),
        RotatingPoint => run_rotating_point(cfg),
        RotatingConvergence => run_rotating_convergence(cfg),
        SupercriticalSearch => run_supercritical_search(cfg),
        LongRange => run_long_range(cfg),
        SigmaBlowup => run_sigma_blowup(cfg),
        JGrowth => run_j_growth(cfg),
        FocusingSoliton => run_focusing_soliton(cfg),
        ContinuitySigma => run_continuity_sigma(cfg),
    }
}

fn short_range(cfg: &ExperimentConfig, tau: f64) -> Result<ScatterConfig> {
    Ok(ScatterConfig::short_range(cfg.sigma, cfg.nonlinearity()?, cfg.m, tau).with_coupling(cfg.coupling))
}

// ---------------------------------------------------------------- visualize

/// Plotting grid for `visualize`: [−10, 10] with 2001 points.
pub const PLOT_GRID: (f64, f64, usize) = (-10.0, 10.0, 2001);

pub fn visualize_data(x: f64) -> Complex64 {
    Complex64::cis(x) * (-(x - 1.0).powi(2) / 2.0).exp() + (-(x + 2.0).powi(2) / 4.0).exp()
}

pub fn run_visualize(cfg: &ExperimentConfig) -> Result<Report> {
    let plan = TransformPlan::new(cfg.m)?;
    let u_minus = AsymptoticState::minus(plan.project(visualize_data)?)?;
    let sc = short_range(cfg, cfg.tau)?;
    let u_plus = scatter_with(&u_minus, &sc, &plan, None)?.u_plus;

    let (lo, hi, n) = PLOT_GRID;
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let a = evaluate_at(&u_minus.field, &xs);
    let b = evaluate_at(&u_plus.field, &xs);
    let mut rep = Report::new(cfg.experiment, "x,re_u_minus,im_u_minus,re_u_plus,im_u_plus");
    for k in 0..n {
        rep.push(&[xs[k], a[k].re, a[k].im, b[k].re, b[k].im]);
    }
    let gaps = invariants_of(&u_minus.field).gaps(&invariants_of(&u_plus.field));
    rep.summary = json!({
        "grid": {"from": lo, "to": hi, "points": n},
        "mass_gap": gaps[0],
        "centre_gap": gaps[3],
        "rows": rep.rows.len(),
    });
    Ok(rep)
}

// ------------------------------------------------------------- conservation

/// |𝓘_i(S(u₋)) − 𝓘_i(u₋)| for mass, kinetic, momentum, centre, then the
/// moment-identity gap.
pub fn conservation_gaps(u_minus: &AsymptoticState, sc: &ScatterConfig, plan: &TransformPlan) -> Result<[f64; 5]> {
    let u_plus = scatter_with(u_minus, sc, plan, None)?.u_plus;
    let g = invariants_of(&u_minus.field).gaps(&invariants_of(&u_plus.field));
    let moment = moment_identity_gap(u_minus, &u_plus, sc.d, sc.nonlinearity, plan)?;
    Ok([g[0], g[1], g[2], g[3], moment])
}

/// Sample `k` of a seeded family: `data_m` random modes padded to `m`.
pub fn random_sample(kind: RandomKind, data_m: usize, m: usize, seed: u64, k: usize) -> SpectralField {
    resized(&gen_random_state(&RandomDataSpec::new(kind, data_m, seed.wrapping_add(k as u64))), m)
}

const GAP_NAMES: [&str; 5] = ["mass", "kinetic", "momentum", "centre", "moment"];

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn run_conservation(cfg: &ExperimentConfig) -> Result<Report> {
    let plan = TransformPlan::new(cfg.m)?;
    let mut rep = Report::new(
        cfg.experiment,
        "tau,data_m,sample,ok,gap_mass,gap_kinetic,gap_momentum,gap_centre,gap_moment",
    );
    let mut levels = Vec::new();
    for &(tau, data_m) in &cfg.levels {
        let sc = short_range(cfg, tau)?;
        let results = map_range(cfg.num_samples, |k| {
            let field = random_sample(RandomKind::UnitSquare, data_m, cfg.m, cfg.seed, k);
            AsymptoticState::minus(field).and_then(|u| conservation_gaps(&u, &sc, &plan))
        });
        let mut per_gap: Vec<Vec<f64>> = vec![Vec::new(); 5];
        let mut aborts = Vec::new();
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(g) => {
                    rep.push(&[tau, data_m as f64, k as f64, 1.0, g[0], g[1], g[2], g[3], g[4]]);
                    for (i, x) in g.iter().enumerate() {
                        per_gap[i].push(*x);
                    }
                }
                Err(e) => {
                    rep.push(&[tau, data_m as f64, k as f64, 0.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
                    aborts.push(json!({"sample": k, "error": e.to_string()}));
                }
            }
        }
        let mut max = serde_json::Map::new();
        let mut med = serde_json::Map::new();
        for (i, name) in GAP_NAMES.iter().enumerate() {
            max.insert(name.to_string(), json!(per_gap[i].iter().copied().fold(0.0, f64::max)));
            med.insert(name.to_string(), json!(median(&mut per_gap[i])));
        }
        levels.push(json!({"tau": tau, "data_m": data_m, "max": max, "median": med, "aborted": aborts}));
    }
    rep.summary = json!({"solver_m": cfg.m, "samples": cfg.num_samples, "levels": levels});
    Ok(rep)
}

// ---------------------------------------------------------- rotating points

/// Largest ν jump between continuation stages of [`solve_rotating`].
const NU_STEP: f64 = 0.5;

/// Ground state for (j, θ) at `sigma`, solved on `plan` from a Gaussian.
/// Newton from a Gaussian only converges for moderate ν, so larger ν are
/// reached through intermediate frequencies starting at ν = 2.5.
pub fn solve_rotating(j: u32, theta: f64, sigma: f64, nl: Nonlinearity, plan: &TransformPlan) -> Result<StationarySolution> {
    let spec = RotatingPointSpec::new(j, theta, sigma)?;
    let opts = SolverOptions {
        nonlinearity: nl,
        ..SolverOptions::default()
    };
    let start = RotatingPointSpec::new(1, 0.0, sigma)?;
    let (first, stages) = if spec.nu > start.nu + NU_STEP {
        (start, ((spec.nu - start.nu) / NU_STEP).ceil() as usize)
    } else {
        (spec, 0)
    };
    let init = gaussian_init(&first, plan.len(), nl)?;
    let mut sol = solve_stationary_with(&first, &init, &opts, plan)?;
    for k in 1..=stages {
        let nu = first.nu + (spec.nu - first.nu) * k as f64 / stages as f64;
        let stage = if k == stages {
            spec
        } else {
            RotatingPointSpec { nu, ..first }
        };
        let iterations = sol.iterations;
        sol = solve_stationary_with(&stage, &sol.psi, &opts, plan)?;
        sol.iterations += iterations;
    }
    Ok(sol)
}

/// ‖S(u₋) − e^{iθ}u₋‖ for a solved rotating point.
pub fn rotating_error(sol: &StationarySolution, sc: &ScatterConfig, plan: &TransformPlan) -> Result<f64> {
    let u = sol.u_minus();
    let u_plus = scatter_with(&u, sc, plan, None)?.u_plus;
    u_plus.field.distance(&u.field.scaled(Complex64::cis(sol.spec.theta)))
}

pub fn run_rotating_point(cfg: &ExperimentConfig) -> Result<Report> {
    let plan = TransformPlan::new(cfg.m)?;
    let nl = cfg.nonlinearity()?;
    let sol = solve_rotating(cfg.j, cfg.theta, cfg.sigma, nl, &plan)?;
    let err = rotating_error(&sol, &short_range(cfg, cfg.tau)?, &plan)?;
    let mut rep = Report::new(cfg.experiment, "j,theta,nu,M,tau,solve_residual,iterations,mass,pipeline_error");
    rep.push(&[
        cfg.j as f64,
        cfg.theta,
        sol.nu(),
        cfg.m as f64,
        cfg.tau,
        sol.residual_norm,
        sol.iterations as f64,
        sol.psi.l2_norm(),
        err,
    ]);
    rep.summary = json!({
        "solve_residual": sol.residual_norm,
        "iterations": sol.iterations,
        "pipeline_error": err,
        "solution": sol.record(),
    });
    Ok(rep)
}

/// (j, θ) pairs of the convergence study.
pub const CONVERGENCE_CASES: [(u32, f64); 2] = [(1, 0.0), (3, 2.0)];

pub fn run_rotating_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    let nl = cfg.nonlinearity()?;
    let plan = TransformPlan::new(cfg.m)?;
    let plan2 = TransformPlan::new(2 * cfg.m)?;
    let mut rep = Report::new(cfg.experiment, "j,theta,M,tau,error");
    let finest = cfg.tau_list.iter().copied().fold(f64::INFINITY, f64::min);
    let mut cases = Vec::new();
    for (j, theta) in CONVERGENCE_CASES {
        let sol = solve_rotating(j, theta, cfg.sigma, nl, &plan)?;
        let errors: Vec<f64> = map_range(cfg.tau_list.len(), |i| rotating_error(&sol, &short_range(cfg, cfg.tau_list[i])?, &plan))
            .into_iter()
            .collect::<Result<_>>()?;
        for (tau, e) in cfg.tau_list.iter().zip(&errors) {
            rep.push(&[j as f64, theta, cfg.m as f64, *tau, *e]);
        }
        let slope = loglog_slope(&cfg.tau_list, &errors)?;
        // large steps can sit outside the asymptotic regime (high ν)
        let tail = cfg.tau_list.len().saturating_sub(4);
        let asymptotic_slope = loglog_slope(&cfg.tau_list[tail..], &errors[tail..])?;

        let mut sc2 = short_range(cfg, finest)?;
        sc2.m = 2 * cfg.m;
        let sol2 = solve_rotating(j, theta, cfg.sigma, nl, &plan2)?;
        let e2 = rotating_error(&sol2, &sc2, &plan2)?;
        rep.push(&[j as f64, theta, (2 * cfg.m) as f64, finest, e2]);
        let e1 = errors[cfg.tau_list.iter().position(|t| *t == finest).unwrap_or(0)];
        cases.push(json!({
            "j": j,
            "theta": theta,
            "nu": sol.nu(),
            "solve_residual": sol.residual_norm,
            "slope": slope,
            "asymptotic_slope": asymptotic_slope,
            "finest_tau": finest,
            "finest_error": e1,
            "doubled_m_error": e2,
            "doubled_m_relative_change": (e2 - e1).abs() / e1,
        }));
    }
    rep.summary = json!({"cases": cases});
    Ok(rep)
}

/// Continuation from the critical solution, θ fit, then refinement, all at
/// the step `tau`.
pub fn supercritical_search(cfg: &ExperimentConfig, sigma: f64, tau: f64) -> Result<Value> {
    let nl = cfg.nonlinearity()?;
    let plan = TransformPlan::new(cfg.m)?;
    let base = solve_rotating(1, 0.0, 2.0, nl, &plan)?;
    let opts = SolverOptions {
        nonlinearity: nl,
        ..SolverOptions::default()
    };
    let cont = continue_in_sigma(&base, sigma, 4, &opts)?;
    let u = cont.u_minus();
    let mut sc = ScatterConfig::short_range(sigma, nl, cfg.m, tau);
    sc.coupling = cfg.coupling;
    let u_plus = scatter_with(&u, &sc, &plan, None)?.u_plus;
    let fit = fit_theta(&u, &u_plus)?;
    let ropts = RefineOptions {
        max_iters: cfg.budget,
        ..RefineOptions::default()
    };
    let out = refine_rotating_point(&u.field, fit.theta, &sc, &ropts)?;
    Ok(json!({
        "sigma": sigma,
        "tau": tau,
        "fit_theta": fit.theta,
        "fit_residual": fit.residual,
        "refined_theta": out.theta,
        "refined_residual": out.residual,
        "evaluations": out.evaluations,
        "converged": out.converged,
    }))
}

pub fn run_supercritical_search(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::new(
        cfg.experiment,
        "sigma,tau,fit_theta,fit_residual,refined_theta,refined_residual,evaluations",
    );
    let mut results = Vec::new();
    for &sigma in &cfg.sigma_list {
        let mut pair = Vec::new();
        for tau in [cfg.tau, cfg.tau / 2.0] {
            let r = supercritical_search(cfg, sigma, tau)?;
            rep.push(&[
                sigma,
                tau,
                r["fit_theta"].as_f64().unwrap_or(f64::NAN),
                r["fit_residual"].as_f64().unwrap_or(f64::NAN),
                r["refined_theta"].as_f64().unwrap_or(f64::NAN),
                r["refined_residual"].as_f64().unwrap_or(f64::NAN),
                r["evaluations"].as_f64().unwrap_or(f64::NAN),
            ]);
            pair.push(r);
        }
        let a = pair[0]["refined_residual"].as_f64().unwrap_or(f64::NAN);
        let b = pair[1]["refined_residual"].as_f64().unwrap_or(f64::NAN);
        results.push(json!({
            "sigma": sigma,
            "residual": a,
            "residual_half_tau": b,
            "best_residual": a.min(b),
            "halving_ratio": a.max(b) / a.min(b),
            "runs": pair,
        }));
    }
    rep.summary = json!({"budget": cfg.budget, "results": results});
    Ok(rep)
}

// --------------------------------------------------------------- long range

fn node_moduli(field: &SpectralField, plan: &TransformPlan) -> Result<Vec<f64>> {
    Ok(plan.synthesize(field)?.iter().map(|v| v.norm()).collect())
}

fn l2_of_nodal(plan: &TransformPlan, a: &[f64], b: &[f64]) -> f64 {
    plan.integrate_nodal(a.iter().zip(b).map(|(x, y)| (x - y).powi(2))).sqrt()
}

pub fn run_long_range(cfg: &ExperimentConfig) -> Result<Report> {
    let nl = cfg.nonlinearity()?;
    let plan = TransformPlan::new(cfg.m)?;
    let u = AsymptoticState::minus(SpectralField::basis(cfg.m, 0).scaled(Complex64::new(cfg.amplitude, 0.0)))?;
    let runs = map_range(cfg.tau_list.len(), |i| {
        let sc = ScatterConfig::long_range(nl, cfg.m, cfg.tau_list[i]).with_coupling(cfg.coupling);
        let out = scatter_with(&u, &sc, &plan, None)?;
        let moduli = node_moduli(&out.run.state.field, &plan)?;
        let hat = out.u_plus.field.fourier(false);
        let hat_mod = node_moduli(&hat, &plan)?;
        Ok::<_, Error>((moduli, hat_mod))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut rep = Report::new(cfg.experiment, "tau,modulus_diff,u_plus_hat_l2,u_plus_hat_peak");
    let mut diffs = Vec::new();
    for (i, tau) in cfg.tau_list.iter().enumerate() {
        let diff = match runs.get(i + 1) {
            Some(next) => l2_of_nodal(&plan, &runs[i].0, &next.0),
            None => f64::NAN,
        };
        if diff.is_finite() {
            diffs.push(diff);
        }
        let hat = &runs[i].1;
        let l2 = plan.integrate_nodal(hat.iter().map(|h| h * h)).sqrt();
        let peak = hat.iter().copied().fold(0.0, f64::max);
        rep.push(&[*tau, diff, l2, peak]);
    }
    let monotone = diffs.windows(2).all(|w| w[1] < w[0]);
    rep.summary = json!({"modulus_diffs": diffs, "monotone": monotone});
    Ok(rep)
}

// -------------------------------------------------------- large-data growth

/// Weighted random data at t_lens = 0 with ‖v₀‖_∞ = amplitude.
pub fn weighted_start(cfg: &ExperimentConfig, plan: &TransformPlan) -> Result<LensState> {
    let data_m = if cfg.data_m == 0 { cfg.m } else { cfg.data_m };
    let field = random_sample(RandomKind::LambdaWeighted, data_m, cfg.m, cfg.seed, 0);
    LensState::new(scale_to_amplitude(&field, cfg.amplitude, plan)?, 0.0)
}

/// One growth trajectory: rows of (t_lens, Σ-norm, a, j, mass).
pub struct GrowthRun {
    pub rows: Vec<[f64; 5]>,
    pub max_mass_drift: f64,
}

/// Runs from t = 0 to π/2 − end_offset at `sigma`, with a 1% mass sentinel.
pub fn growth_run(cfg: &ExperimentConfig, sigma: f64, v0: &LensState, plan: &TransformPlan) -> Result<GrowthRun> {
    let mut evo = EvolutionConfig::new(sigma, cfg.nonlinearity()?, cfg.m, cfg.tau, 0.0, FRAC_PI_2 - cfg.end_offset)
        .with_coupling(cfg.coupling);
    evo.mass_tolerance = 0.01;
    let mut rows = Vec::new();
    let mut observe = |state: &LensState| {
        let (a, j) = lens_diagnostics(state);
        rows.push([state.t_lens, sigma_norm(&state.field), a, j, state.field.l2_norm()]);
    };
    observe(v0);
    let run = Propagator::new(v0, &evo, plan)?.run_with(|_, s| observe(s))?;
    Ok(GrowthRun {
        rows,
        max_mass_drift: run.max_mass_drift,
    })
}

/// Σ-norm at the first row with t_lens ≥ 1 against the last row.
pub fn growth_factor(rows: &[[f64; 5]]) -> f64 {
    let start = rows.iter().find(|r| r[0] >= 1.0 - 1e-12).or(rows.last());
    match (start, rows.last()) {
        (Some(a), Some(b)) => b[1] / a[1],
        _ => f64::NAN,
    }
}

pub fn run_sigma_blowup(cfg: &ExperimentConfig) -> Result<Report> {
    let plan = TransformPlan::new(cfg.m)?;
    let v0 = weighted_start(cfg, &plan)?;
    let mut rep = Report::new(cfg.experiment, "sigma,t_lens,tan_t,sigma_norm,a_norm,j_norm,mass");
    let mut results = Vec::new();
    for &sigma in &cfg.sigma_list {
        let g = growth_run(cfg, sigma, &v0, &plan)?;
        for r in &g.rows {
            rep.push(&[sigma, r[0], r[0].tan(), r[1], r[2], r[3], r[4]]);
        }
        results.push(json!({
            "sigma": sigma,
            "growth_factor": growth_factor(&g.rows),
            "sigma_norm_start": g.rows[0][1],
            "sigma_norm_end": g.rows.last().map(|r| r[1]),
            "max_mass_drift": g.max_mass_drift,
            "sentinel_ok": g.max_mass_drift <= 0.01,
        }));
    }
    rep.summary = json!({"amplitude": cfg.amplitude, "t_end": FRAC_PI_2 - cfg.end_offset, "results": results});
    Ok(rep)
}

pub fn run_j_growth(cfg: &ExperimentConfig) -> Result<Report> {
    let plan = TransformPlan::new(cfg.m)?;
    let v0 = weighted_start(cfg, &plan)?;
    let g = growth_run(cfg, cfg.sigma, &v0, &plan)?;
    let mut rep = Report::new(cfg.experiment, "t_lens,tan_t,j_norm");
    for r in &g.rows {
        rep.push(&[r[0], r[0].tan(), r[3]]);
    }
    let series: Vec<(f64, f64)> = g.rows.iter().map(|r| (r[0], r[3])).collect();
    let slope = growth_slope(&series, DEFAULT_GROWTH_WINDOW)?;
    rep.summary = json!({
        "sigma": cfg.sigma,
        "window": DEFAULT_GROWTH_WINDOW,
        "slope": slope,
        "bound_exponent": 1.0 - cfg.d as f64 * cfg.sigma / 2.0,
        "max_mass_drift": g.max_mass_drift,
    });
    Ok(rep)
}

// -------------------------------------------------------- focusing soliton

/// φ_ν(x) = √(2ν) sech(x√(2ν)).
pub fn ground_state_profile(nu: f64, x: f64) -> f64 {
    let k = (2.0 * nu).sqrt();
    k / (k * x).cosh()
}

/// (‖φ_{1/2}‖_{L¹}, ‖φ̂_{1/2}‖_{L^∞}) computed through the spectral field.
pub fn soliton_closed_forms(plan: &TransformPlan) -> Result<(f64, f64)> {
    let phi = plan.project(|x| Complex64::new(ground_state_profile(0.5, x), 0.0))?;
    let l1 = lp_norm(&phi, 1.0, plan)?;
    let hat = phi.fourier(false);
    let probe: Vec<f64> = (-100..=100).map(|k| k as f64 * 0.01).collect();
    let sup = evaluate_at(&hat, &probe).iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok((l1, sup))
}

pub fn run_focusing_soliton(cfg: &ExperimentConfig) -> Result<Report> {
    let nl = cfg.nonlinearity()?;
    let plan = TransformPlan::new(cfg.m)?;
    let phi = plan.project(|x| Complex64::new(ground_state_profile(0.5, x), 0.0))?;
    let t_end = FRAC_PI_2 - cfg.end_offset;
    let runs = map_range(cfg.alpha_list.len(), |i| {
        let alpha = cfg.alpha_list[i];
        let v0 = LensState::new(phi.scaled(Complex64::new(alpha, 0.0)), 0.0)?;
        let evo = EvolutionConfig::new(cfg.sigma, nl, cfg.m, cfg.tau, 0.0, t_end).with_coupling(cfg.coupling);
        let mut values = vec![Complex64::new(0.0, 0.0); plan.len()];
        let mut rows = Vec::new();
        let mut observe = |s: &LensState| {
            plan.synthesize_into(s.field.coeffs(), &mut values);
            rows.push((s.t_lens, values.iter().map(|v| v.norm()).fold(0.0, f64::max)));
        };
        observe(&v0);
        Propagator::new(&v0, &evo, &plan)?.run_with(|_, s| observe(s))?;
        Ok::<_, Error>(rows)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut rep = Report::new(cfg.experiment, "alpha,t_lens,linf,reference");
    let mut deviations = Vec::new();
    for (alpha, rows) in cfg.alpha_list.iter().zip(&runs) {
        let mut worst: f64 = 0.0;
        for &(t, linf) in rows {
            let reference = t.cos().powf(-0.5);
            rep.push(&[*alpha, t, linf, reference]);
            if t <= FRAC_PI_2 - 0.1 + 1e-12 {
                worst = worst.max((linf / (alpha * reference) - 1.0).abs());
            }
        }
        deviations.push(json!({"alpha": alpha, "max_relative_deviation": worst}));
    }
    let (l1, hat_sup) = soliton_closed_forms(&plan)?;
    rep.summary = json!({
        "reference_window_end": FRAC_PI_2 - 0.1,
        "deviations": deviations,
        "phi_l1": l1,
        "phi_l1_error": (l1 - PI).abs(),
        "phi_hat_sup": hat_sup,
        "phi_hat_sup_error": (hat_sup - (PI / 2.0).sqrt()).abs(),
    });
    Ok(rep)
}

// --------------------------------------------------------------- continuity

/// sup_t ‖v(t) − v^ε(t)‖ for the pair at σ and σ + 2ε from the same v₋,
/// plus the trajectory of the difference.
pub fn continuity_pair(cfg: &ExperimentConfig, u: &AsymptoticState, eps: f64, plan: &TransformPlan) -> Result<(f64, Vec<(f64, f64)>)> {
    let sc = short_range(cfg, cfg.tau)?;
    let v0 = inject_minus(u, &sc)?;
    let evo = sc.evolution();
    let mut evo_eps = evo.clone();
    evo_eps.sigma = cfg.sigma + 2.0 * eps;
    let mut a = Propagator::new(&v0, &evo, plan)?;
    let mut b = Propagator::new(&v0, &evo_eps, plan)?;
    let mut sup: f64 = 0.0;
    let mut trace = vec![(v0.t_lens, 0.0)];
    while a.step()? {
        b.step()?;
        let d = a.state().field.distance(&b.state().field)?;
        sup = sup.max(d);
        trace.push((a.state().t_lens, d));
    }
    Ok((sup, trace))
}

pub fn run_continuity_sigma(cfg: &ExperimentConfig) -> Result<Report> {
    let plan = TransformPlan::new(cfg.m)?;
    let field = random_sample(RandomKind::UnitSquare, cfg.data_m, cfg.m, cfg.seed, 0).scaled(Complex64::new(cfg.amplitude, 0.0));
    let u = AsymptoticState::minus(field)?;
    let runs = map_range(cfg.eps_list.len(), |i| continuity_pair(cfg, &u, cfg.eps_list[i], &plan))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut rep = Report::new(cfg.experiment, "eps,t_lens,diff");
    let stride = (runs.first().map_or(1, |r| r.1.len()) / 400).max(1);
    let mut constants = Vec::new();
    for (eps, (sup, trace)) in cfg.eps_list.iter().zip(&runs) {
        for (k, (t, d)) in trace.iter().enumerate() {
            if k % stride == 0 || k + 1 == trace.len() {
                rep.push(&[*eps, *t, *d]);
            }
        }
        constants.push(sup / eps);
    }
    let hi = constants.iter().copied().fold(f64::MIN, f64::max);
    let lo = constants.iter().copied().fold(f64::MAX, f64::min);
    rep.summary = json!({
        "sigma": cfg.sigma,
        "perturbed_sigma": "sigma + 2 eps",
        "eps": cfg.eps_list,
        "sup_diff": runs.iter().map(|r| r.0).collect::<Vec<_>>(),
        "constants": constants,
        "constant_spread": hi / lo,
    });
    Ok(rep)
}

//! Lie splitting for i∂ₜv = Hv + sign·(cos t)^{dσ−2}|v|^{2σ}v, H = −½Δ + ½|x|².
//!
//! Each step applies the exact pointwise phase of the nonlinear part over
//! [tₙ, tₙ+τ] and then the exact diagonal flow e^{−iλτ} of H.

mod weights;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use weights::{cosine_weight, StepWeights, WEIGHT_TOL};

use crate::error::{Error, Result};
use crate::hermite::{eigenvalue, SpectralField, TransformPlan};
use crate::observables::{record_of, ObservableRecord};
use crate::state::{LensState, Nonlinearity};

/// Recorded in run metadata; the order is fixed.
pub const SUBSTEP_ORDER: &str = "nonlinear-then-linear";

/// Coefficient tails above this fraction of the norm trigger a warning.
pub const TAIL_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub d: usize,
    pub sigma: f64,
    pub nonlinearity: Nonlinearity,
    pub m: usize,
    pub tau: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub record_observables: bool,
    pub record_stride: usize,
    /// Multiplies the nonlinearity; 0 switches it off.
    pub coupling: f64,
    /// Relative L² drift that aborts the run.
    pub mass_tolerance: f64,
}

impl EvolutionConfig {
    pub fn new(sigma: f64, nonlinearity: Nonlinearity, m: usize, tau: f64, t_start: f64, t_end: f64) -> Self {
        Self {
            d: 1,
            sigma,
            nonlinearity,
            m,
            tau,
            t_start,
            t_end,
            record_observables: false,
            record_stride: 1,
            coupling: 1.0,
            mass_tolerance: 0.01,
        }
    }

    pub fn recording(mut self, stride: usize) -> Self {
        self.record_observables = true;
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    /// (cos t)-exponent dσ − 2.
    pub fn exponent(&self) -> f64 {
        self.d as f64 * self.sigma - 2.0
    }

    /// sign · coupling.
    pub fn strength(&self) -> f64 {
        self.nonlinearity.sign() * self.coupling
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 1 {
            return Err(Error::invalid(format!("only d = 1 is implemented, got {}", self.d)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.m == 0 {
            return Err(Error::invalid("M must be positive"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.tau)));
        }
        let half_pi = std::f64::consts::FRAC_PI_2 + 1e-12;
        if !(self.t_start.abs() <= half_pi && self.t_end.abs() <= half_pi) {
            return Err(Error::Domain("t_start and t_end must lie in [−π/2, π/2]".into()));
        }
        if !(self.t_start < self.t_end) {
            return Err(Error::invalid("t_start must be smaller than t_end"));
        }
        if !self.coupling.is_finite() {
            return Err(Error::invalid("coupling must be finite"));
        }
        if !(self.mass_tolerance > 0.0) {
            return Err(Error::invalid("mass tolerance must be positive"));
        }
        Ok(())
    }

    /// t₀ = t_start < t₁ < … < t_N = t_end with spacing τ and a shorter last
    /// step when τ does not divide the interval.
    pub fn time_grid(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let ratio = span / self.tau;
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
        .max(1);
        let mut times: Vec<f64> = (0..steps).map(|n| self.t_start + n as f64 * self.tau).collect();
        times.push(self.t_end);
        times
    }
}

/// α_m ← e^{−iλ_m τ} α_m.
pub fn linear_step(v: &LensState, tau: f64) -> LensState {
    let mut out = v.clone();
    apply_linear(out.field.coeffs_mut(), tau, 1);
    out.t_lens += tau;
    out
}

fn apply_linear(coeffs: &mut [Complex64], tau: f64, d: usize) {
    for (m, c) in coeffs.iter_mut().enumerate() {
        *c *= Complex64::cis(-eigenvalue(m, d) * tau);
    }
}

/// v(x_k) ← exp(−i·strength·W·|v(x_k)|^{2σ}) v(x_k) on node values.
pub fn nonlinear_phase(values: &mut [Complex64], w: f64, sigma: f64, strength: f64) {
    let scale = strength * w;
    if scale == 0.0 {
        return;
    }
    for v in values.iter_mut() {
        let rho = v.norm_sqr().powf(sigma);
        *v *= Complex64::cis(-scale * rho);
    }
}

/// Exact solve of the nonlinear substep with integrated weight W; `strength`
/// is the sign of the nonlinearity (times an optional coupling).
pub fn nonlinear_step(v: &LensState, w: f64, sigma: f64, strength: f64, plan: &TransformPlan) -> Result<LensState> {
    if !(w >= 0.0) {
        return Err(Error::invalid(format!("nonlinear weight must be non-negative, got {w}")));
    }
    let mut values = plan.synthesize(&v.field)?;
    nonlinear_phase(&mut values, w, sigma, strength);
    Ok(LensState {
        field: plan.analyze(&values)?,
        t_lens: v.t_lens,
    })
}

/// Output of a completed run.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: LensState,
    pub records: Vec<ObservableRecord>,
    pub steps: usize,
    pub max_mass_drift: f64,
    pub max_tail_ratio: f64,
    pub warnings: Vec<String>,
}

/// Per-trajectory bookkeeping: the state and its integrity sentinels.
#[derive(Debug, Clone)]
struct Track {
    state: LensState,
    mass0: f64,
    max_drift: f64,
    max_tail: f64,
}

impl Track {
    fn new(v0: &LensState) -> Self {
        Self {
            state: v0.clone(),
            mass0: v0.field.l2_norm(),
            max_drift: 0.0,
            max_tail: tail_ratio(v0.field.coeffs()),
        }
    }

    fn check(&mut self, step: usize, finished: bool, tolerance: f64) -> Result<()> {
        let abort = |reason: String| Error::Propagation {
            step,
            t_lens: self.state.t_lens,
            reason,
        };
        if !self.state.field.is_finite() {
            return Err(abort("non-finite coefficients".into()));
        }
        if self.mass0 > 0.0 {
            let drift = (self.state.field.l2_norm() / self.mass0 - 1.0).abs();
            self.max_drift = self.max_drift.max(drift);
            if drift > tolerance {
                return Err(abort(format!("relative L² drift {drift:.3e} exceeds {tolerance:.1e}")));
            }
        }
        if step % 32 == 0 || finished {
            self.max_tail = self.max_tail.max(tail_ratio(self.state.field.coeffs()));
        }
        Ok(())
    }

    fn finish(self, steps: usize, m: usize, records: Vec<ObservableRecord>) -> Propagation {
        let mut warnings = Vec::new();
        if self.max_tail > TAIL_WARNING {
            warnings.push(format!(
                "coefficient tail reached {:.2e} of the norm (M = {m}); aliasing not controlled",
                self.max_tail
            ));
        }
        Propagation {
            state: self.state,
            records,
            steps,
            max_mass_drift: self.max_drift,
            max_tail_ratio: self.max_tail,
            warnings,
        }
    }
}

fn check_start(v0: &LensState, cfg: &EvolutionConfig, plan: &TransformPlan) -> Result<()> {
    if v0.field.len() != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: cfg.m,
            got: v0.field.len(),
        });
    }
    if plan.len() != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: cfg.m,
            got: plan.len(),
        });
    }
    if (v0.t_lens - cfg.t_start).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "initial state is at t = {}, config starts at {}",
            v0.t_lens, cfg.t_start
        )));
    }
    if !v0.field.is_finite() {
        return Err(Error::invalid("initial state has non-finite coefficients"));
    }
    Ok(())
}

/// Step-by-step driver; [`propagate`] is the one-shot form.
pub struct Propagator<'a> {
    cfg: EvolutionConfig,
    plan: &'a TransformPlan,
    times: Vec<f64>,
    weights: StepWeights,
    track: Track,
    values: Vec<Complex64>,
    step: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(v0: &LensState, cfg: &EvolutionConfig, plan: &'a TransformPlan) -> Result<Self> {
        cfg.validate()?;
        check_start(v0, cfg, plan)?;
        let times = cfg.time_grid();
        let weights = StepWeights::for_grid(cfg.exponent(), &times)?;
        Ok(Self {
            cfg: cfg.clone(),
            plan,
            times,
            weights,
            track: Track::new(v0),
            values: vec![Complex64::new(0.0, 0.0); cfg.m],
            step: 0,
        })
    }

    pub fn state(&self) -> &LensState {
        &self.track.state
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.weights.len()
    }

    /// One Lie step. Returns `Ok(false)` once t_end has been reached.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let n = self.step;
        let (t0, t1) = (self.times[n], self.times[n + 1]);
        let strength = self.cfg.strength();
        let field = &mut self.track.state.field;
        if strength != 0.0 {
            let w = self.weights.weights()[n];
            self.plan.synthesize_into(field.coeffs(), &mut self.values);
            nonlinear_phase(&mut self.values, w, self.cfg.sigma, strength);
            self.plan.analyze_into(&self.values, field.coeffs_mut());
        }
        apply_linear(field.coeffs_mut(), t1 - t0, self.cfg.d);
        self.track.state.t_lens = t1;
        self.step += 1;
        let finished = self.is_finished();
        self.track.check(self.step, finished, self.cfg.mass_tolerance)?;
        Ok(true)
    }

    /// Runs to t_end, calling `observe(step, state)` at step 0, every
    /// `record_stride` steps and at the final step.
    pub fn run_with(mut self, mut observe: impl FnMut(usize, &LensState)) -> Result<Propagation> {
        let stride = self.cfg.record_stride.max(1);
        observe(0, &self.track.state);
        while self.step()? {
            if self.step % stride == 0 || self.is_finished() {
                observe(self.step, &self.track.state);
            }
        }
        Ok(self.track.finish(self.step, self.cfg.m, Vec::new()))
    }
}

/// Propagates several initial states in lockstep on one grid, sharing each
/// pass over the transform matrix. A trajectory that aborts is dropped from
/// the batch and reported in its slot; the others continue.
pub fn propagate_batch(v0: &[LensState], cfg: &EvolutionConfig, plan: &TransformPlan) -> Result<Vec<Result<Propagation>>> {
    cfg.validate()?;
    let times = cfg.time_grid();
    let weights = StepWeights::for_grid(cfg.exponent(), &times)?;
    let stride = cfg.record_stride.max(1);
    let mut slots: Vec<Option<Result<Propagation>>> = Vec::with_capacity(v0.len());
    let mut tracks: Vec<Option<Track>> = Vec::with_capacity(v0.len());
    let mut records: Vec<Vec<ObservableRecord>> = vec![Vec::new(); v0.len()];
    for (i, v) in v0.iter().enumerate() {
        match check_start(v, cfg, plan) {
            Ok(()) => {
                if cfg.record_observables {
                    records[i].push(record_of(v, plan));
                }
                tracks.push(Some(Track::new(v)));
                slots.push(None);
            }
            Err(e) => {
                tracks.push(None);
                slots.push(Some(Err(e)));
            }
        }
    }
    let strength = cfg.strength();
    let mut values: Vec<Vec<Complex64>> = Vec::new();
    let total = weights.len();
    for n in 0..total {
        let (t0, t1) = (times[n], times[n + 1]);
        let active: Vec<usize> = (0..tracks.len()).filter(|&i| tracks[i].is_some()).collect();
        if active.is_empty() {
            break;
        }
        if strength != 0.0 {
            values.resize(active.len(), vec![Complex64::new(0.0, 0.0); cfg.m]);
            let coeffs: Vec<&[Complex64]> = active
                .iter()
                .map(|&i| tracks[i].as_ref().map(|t| t.state.field.coeffs()).unwrap_or(&[]))
                .collect();
            plan.synthesize_batch(&coeffs, &mut values[..active.len()]);
            for v in values[..active.len()].iter_mut() {
                nonlinear_phase(v, weights.weights()[n], cfg.sigma, strength);
            }
            let vals: Vec<&[Complex64]> = values[..active.len()].iter().map(|v| v.as_slice()).collect();
            let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); cfg.m]; active.len()];
            plan.analyze_batch(&vals, &mut out);
            for (&i, c) in active.iter().zip(out) {
                if let Some(t) = tracks[i].as_mut() {
                    t.state.field = SpectralField::new(c);
                }
            }
        }
        let finished = n + 1 == total;
        for &i in &active {
            let Some(t) = tracks[i].as_mut() else { continue };
            apply_linear(t.state.field.coeffs_mut(), t1 - t0, cfg.d);
            t.state.t_lens = t1;
            if let Err(e) = t.check(n + 1, finished, cfg.mass_tolerance) {
                tracks[i] = None;
                slots[i] = Some(Err(e));
                continue;
            }
            if cfg.record_observables && ((n + 1) % stride == 0 || finished) {
                records[i].push(record_of(&t.state, plan));
            }
        }
    }
    Ok(slots
        .into_iter()
        .zip(tracks)
        .zip(records)
        .map(|((slot, track), rec)| match (slot, track) {
            (Some(err), _) => err,
            (None, Some(t)) => Ok(t.finish(total, cfg.m, rec)),
            (None, None) => Err(Error::invalid("trajectory lost")),
        })
        .collect())
}

/// Top sixteenth of the modes relative to the whole norm.
fn tail_ratio(coeffs: &[Complex64]) -> f64 {
    let m = coeffs.len();
    let start = m - (m / 16).max(1);
    let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = coeffs[start..].iter().map(|c| c.norm_sqr()).sum();
    (tail / total).sqrt()
}

/// Propagates v0 from cfg.t_start to cfg.t_end, recording observables when
/// requested.
pub fn propagate(v0: &LensState, cfg: &EvolutionConfig, plan: &TransformPlan) -> Result<Propagation> {
    let propagator = Propagator::new(v0, cfg, plan)?;
    let record = cfg.record_observables;
    let mut records = Vec::new();
    let mut out = propagator.run_with(|_, state| {
        if record {
            records.push(record_of(state, plan));
        }
    })?;
    out.records = records;
    Ok(out)
}

/// Runs the reversed problem: w(s) = conj v(−s) solves the same equation, so
/// propagating conj v(t1) from −t1 to −t0 and conjugating gives v(t0).
pub fn propagate_backward(v1: &LensState, t0: f64, cfg: &EvolutionConfig, plan: &TransformPlan) -> Result<LensState> {
    let mut reversed = cfg.clone();
    reversed.t_start = -v1.t_lens;
    reversed.t_end = -t0;
    reversed.record_observables = false;
    let w0 = LensState {
        field: v1.field.conj(),
        t_lens: -v1.t_lens,
    };
    let out = propagate(&w0, &reversed, plan)?;
    Ok(LensState {
        field: out.state.field.conj(),
        t_lens: t0,
    })
}

impl SpectralField {
    /// e^{−iλ_m t} α_m, the exact linear flow over lens time t (d = 1).
    pub fn linear_flow(&self, t: f64) -> SpectralField {
        let mut out = self.clone();
        apply_linear(out.coeffs_mut(), t, 1);
        out
    }
}

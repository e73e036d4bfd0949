//! Browser bindings for three small operations on the scattering map.
//!
//! The plain functions in [`demo`] do the work and are tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use wasm_bindgen::prelude::*;

pub mod demo {
    use lenscatter::experiments::config::{ExperimentConfig, ExperimentKind};
    use lenscatter::experiments::runners::{conservation_gaps, growth_run, visualize_data, weighted_start};
    use lenscatter::hermite::evaluate_at;
    use lenscatter::lens_map::{scatter, ScatterConfig};
    use lenscatter::{AsymptoticState, Nonlinearity, TransformPlan};

    pub type DemoResult<T> = Result<T, String>;

    fn nonlinearity(focusing: bool) -> Nonlinearity {
        if focusing {
            Nonlinearity::Focusing
        } else {
            Nonlinearity::Defocusing
        }
    }

    fn prepare(sigma: f64, focusing: bool, m: usize, tau: f64) -> DemoResult<(TransformPlan, AsymptoticState, ScatterConfig)> {
        let plan = TransformPlan::new(m).map_err(|e| e.to_string())?;
        let field = plan.project(visualize_data).map_err(|e| e.to_string())?;
        let u = AsymptoticState::minus(field).map_err(|e| e.to_string())?;
        let sc = ScatterConfig::short_range(sigma, nonlinearity(focusing), m, tau);
        sc.validate().map_err(|e| e.to_string())?;
        Ok((plan, u, sc))
    }

    /// u₊ = S(u₋) for the two-bump profile, sampled on `points` nodes of
    /// [−10, 10]. Layout: x, |u₋|, |u₊|, Re u₊, Im u₊, each `points` long.
    pub fn scatter_profile(sigma: f64, focusing: bool, m: usize, tau: f64, points: usize) -> DemoResult<Vec<f64>> {
        if points < 2 {
            return Err("need at least two plot points".into());
        }
        let (plan, u, sc) = prepare(sigma, focusing, m, tau)?;
        let up = scatter(&u, &sc, &plan).map_err(|e| e.to_string())?;
        let xs: Vec<f64> = (0..points).map(|k| -10.0 + 20.0 * k as f64 / (points - 1) as f64).collect();
        let a = evaluate_at(&u.field, &xs);
        let b = evaluate_at(&up.field, &xs);
        let mut out = xs.clone();
        out.extend(a.iter().map(|z| z.norm()));
        out.extend(b.iter().map(|z| z.norm()));
        out.extend(b.iter().map(|z| z.re));
        out.extend(b.iter().map(|z| z.im));
        Ok(out)
    }

    /// |Δ| of mass, kinetic energy, momentum, centre and the moment identity
    /// across one scattering run of the same profile.
    pub fn invariant_gaps(sigma: f64, focusing: bool, m: usize, tau: f64) -> DemoResult<Vec<f64>> {
        let (plan, u, sc) = prepare(sigma, focusing, m, tau)?;
        conservation_gaps(&u, &sc, &plan).map(|g| g.to_vec()).map_err(|e| e.to_string())
    }

    /// Σ-norm along the lens time for weighted random data with
    /// ‖v₀‖_∞ = amplitude, defocusing, up to π/2 − 0.01. Pairs (t, Σ).
    pub fn sigma_norm_growth(sigma: f64, amplitude: f64, m: usize, tau: f64, seed: u64) -> DemoResult<Vec<f64>> {
        let pairs: Vec<(String, String)> = [
            ("sigma", sigma.to_string()),
            ("amplitude", amplitude.to_string()),
            ("M", m.to_string()),
            ("tau", tau.to_string()),
            ("seed", seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let cfg = ExperimentConfig::build(ExperimentKind::SigmaBlowup, &[], &pairs).map_err(|e| e.to_string())?;
        let plan = TransformPlan::new(cfg.m).map_err(|e| e.to_string())?;
        let v0 = weighted_start(&cfg, &plan).map_err(|e| e.to_string())?;
        let run = growth_run(&cfg, sigma, &v0, &plan).map_err(|e| e.to_string())?;
        Ok(run.rows.iter().flat_map(|r| [r[0], r[1]]).collect())
    }
}

#[wasm_bindgen(js_name = scatterProfile)]
pub fn scatter_profile(sigma: f64, focusing: bool, m: usize, tau: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::scatter_profile(sigma, focusing, m, tau, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = invariantGaps)]
pub fn invariant_gaps(sigma: f64, focusing: bool, m: usize, tau: f64) -> Result<Vec<f64>, JsError> {
    demo::invariant_gaps(sigma, focusing, m, tau).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sigmaNormGrowth)]
pub fn sigma_norm_growth(sigma: f64, amplitude: f64, m: usize, tau: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    demo::sigma_norm_growth(sigma, amplitude, m, tau, seed).map_err(|e| JsError::new(&e))
}

//! Experiment configuration: flat `key = value` files plus overrides.
//!
//! Layering is defaults → full-scale preset (if requested) → file → command
//! line, each layer overriding the previous one key by key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Visualize,
    Conservation,
    RotatingPoint,
    RotatingConvergence,
    SupercriticalSearch,
    LongRange,
    SigmaBlowup,
    JGrowth,
    FocusingSoliton,
    ContinuitySigma,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        Self::Visualize,
        Self::Conservation,
        Self::RotatingPoint,
        Self::RotatingConvergence,
        Self::SupercriticalSearch,
        Self::LongRange,
        Self::SigmaBlowup,
        Self::JGrowth,
        Self::FocusingSoliton,
        Self::ContinuitySigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Visualize => "visualize",
            Self::Conservation => "conservation",
            Self::RotatingPoint => "rotating_point",
            Self::RotatingConvergence => "rotating_convergence",
            Self::SupercriticalSearch => "supercritical_search",
            Self::LongRange => "long_range",
            Self::SigmaBlowup => "sigma_blowup",
            Self::JGrowth => "j_growth",
            Self::FocusingSoliton => "focusing_soliton",
            Self::ContinuitySigma => "continuity_sigma",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub sigma: f64,
    /// σ sweep for `sigma_blowup` and `supercritical_search`.
    pub sigma_list: Vec<f64>,
    /// +1 defocusing, −1 focusing.
    pub sign: i32,
    /// Modes of the solver grid.
    pub m: usize,
    pub tau: f64,
    pub seed: u64,
    pub num_samples: usize,
    /// ‖v₀‖_∞ for the weighted-data runs, the data scale elsewhere.
    pub amplitude: f64,
    pub output_dir: PathBuf,
    pub full_scale: bool,
    /// Nonzero modes of random data (zero-padded up to `m`).
    pub data_m: usize,
    /// (τ, data modes) pairs for `conservation`.
    pub levels: Vec<(f64, usize)>,
    /// τ sweep for convergence studies.
    pub tau_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    /// Runs stop at t_lens = π/2 − end_offset where the endpoint is not reached.
    pub end_offset: f64,
    pub coupling: f64,
    /// Refinement iterations for `supercritical_search`.
    pub budget: usize,
    /// Rotating-point index and angle for `rotating_point`.
    pub j: u32,
    pub theta: f64,
}

fn pow2_list(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

impl ExperimentConfig {
    /// Desk-scale defaults for one experiment.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let mut c = Self {
            experiment,
            d: 1,
            sigma: 2.0,
            sigma_list: vec![],
            sign: 1,
            m: 256,
            tau: 1e-3,
            seed: 20240101,
            num_samples: 1,
            amplitude: 1.0,
            output_dir: PathBuf::from("out"),
            full_scale: false,
            data_m: 0,
            levels: vec![],
            tau_list: vec![],
            eps_list: vec![],
            alpha_list: vec![],
            end_offset: 0.0,
            coupling: 1.0,
            budget: 20,
            j: 1,
            theta: 0.0,
        };
        use ExperimentKind::*;
        match experiment {
            Visualize => {
                c.tau = 1e-3;
            }
            Conservation => {
                c.m = 200;
                c.tau = 0.01;
                c.num_samples = 50;
                c.data_m = 200;
                c.levels = vec![(0.1, 100), (0.01, 200)];
            }
            RotatingPoint => {}
            RotatingConvergence => {
                c.tau_list = pow2_list(4, 10);
            }
            SupercriticalSearch => {
                c.m = 64;
                c.tau = 4e-3;
                c.sigma_list = vec![2.0, 2.01];
            }
            LongRange => {
                c.sigma = 1.0;
                c.m = 128;
                c.amplitude = 0.1;
                c.tau_list = pow2_list(6, 12);
            }
            SigmaBlowup => {
                c.m = 2048;
                c.tau = 2f64.powi(-10);
                c.amplitude = 10.0;
                c.sigma_list = vec![1.5, 1.15];
                c.end_offset = 0.01;
            }
            JGrowth => {
                c.sigma = 1.15;
                c.m = 2048;
                c.tau = 2f64.powi(-10);
                c.amplitude = 10.0;
                c.end_offset = 0.01;
            }
            FocusingSoliton => {
                c.sigma = 1.0;
                c.sign = -1;
                c.m = 2048;
                c.tau = 2f64.powi(-10);
                c.alpha_list = vec![1.0, 0.75, 0.5, 0.25];
                c.end_offset = 0.05;
            }
            ContinuitySigma => {
                c.tau = 1e-3;
                c.data_m = 8;
                c.amplitude = 0.5;
                c.eps_list = vec![1e-1, 1e-2, 1e-3];
            }
        }
        c
    }

    /// High-resolution preset for the large-data and soliton runs.
    fn apply_full_scale(&mut self) {
        use ExperimentKind::*;
        if matches!(self.experiment, SigmaBlowup | JGrowth | FocusingSoliton) {
            self.m = 8192;
            self.tau = 2f64.powi(-14);
        }
        self.full_scale = true;
    }

    /// Builds a config from file pairs and command-line pairs, later pairs
    /// winning, then validates it.
    pub fn build(experiment: ExperimentKind, file: &[(String, String)], cli: &[(String, String)]) -> Result<Self> {
        let mut merged: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in file.iter().chain(cli) {
            merged.insert(canonical_key(k)?.to_string(), v.clone());
        }
        if let Some(name) = merged.get("experiment") {
            if name.parse::<ExperimentKind>()? != experiment {
                return Err(Error::Config(format!(
                    "config file is for experiment '{name}', not '{experiment}'"
                )));
            }
        }
        let mut cfg = Self::defaults(experiment);
        if let Some(v) = merged.get("full_scale") {
            if parse_bool("full_scale", v)? {
                cfg.apply_full_scale();
            }
        }
        // a single σ given explicitly replaces the default sweep
        if merged.contains_key("sigma") && !merged.contains_key("sigma_list") && !cfg.sigma_list.is_empty() {
            cfg.sigma_list.clear();
        }
        for (k, v) in &merged {
            cfg.set(k, v)?;
        }
        if cfg.sigma_list.is_empty() && matches!(experiment, ExperimentKind::SigmaBlowup | ExperimentKind::SupercriticalSearch) {
            cfg.sigma_list = vec![cfg.sigma];
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => {}
            "d" => self.d = parse_num(key, v)?,
            "sigma" => self.sigma = parse_num(key, v)?,
            "sigma_list" => self.sigma_list = parse_list(key, v)?,
            "sign" => self.sign = parse_num(key, v)?,
            "M" => self.m = parse_num(key, v)?,
            "tau" => self.tau = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "num_samples" => self.num_samples = parse_num(key, v)?,
            "amplitude" => self.amplitude = parse_num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "full_scale" => self.full_scale = parse_bool(key, v)?,
            "data_m" => self.data_m = parse_num(key, v)?,
            "levels" => self.levels = parse_levels(v)?,
            "tau_list" => self.tau_list = parse_list(key, v)?,
            "eps_list" => self.eps_list = parse_list(key, v)?,
            "alpha_list" => self.alpha_list = parse_list(key, v)?,
            "end_offset" => self.end_offset = parse_num(key, v)?,
            "coupling" => self.coupling = parse_num(key, v)?,
            "budget" => self.budget = parse_num(key, v)?,
            "j" => self.j = parse_num(key, v)?,
            "theta" => self.theta = parse_num(key, v)?,
            _ => unreachable!("keys are canonicalised first"),
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        Nonlinearity::from_sign(self.sign).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d != 1 {
            return bad(format!("only d = 1 is implemented, got d = {}", self.d));
        }
        if self.sign != 1 && self.sign != -1 {
            return bad(format!("sign must be +1 or -1, got {}", self.sign));
        }
        let positive = [
            ("sigma", self.sigma),
            ("tau", self.tau),
            ("amplitude", self.amplitude),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {x}"));
            }
        }
        if self.m == 0 || self.num_samples == 0 || self.budget == 0 {
            return bad("M, num_samples and budget must be positive".into());
        }
        if !(self.end_offset >= 0.0 && self.end_offset < std::f64::consts::FRAC_PI_2) {
            return bad(format!("end_offset must lie in [0, π/2), got {}", self.end_offset));
        }
        if self.j == 0 || !self.theta.is_finite() {
            return bad("j must be at least 1 and theta finite".into());
        }
        if !self.coupling.is_finite() {
            return bad("coupling must be finite".into());
        }
        let all_positive = |name: &str, xs: &[f64]| -> Result<()> {
            if xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!("{name} entries must be positive and finite")));
            }
            Ok(())
        };
        all_positive("sigma_list", &self.sigma_list)?;
        all_positive("tau_list", &self.tau_list)?;
        all_positive("eps_list", &self.eps_list)?;
        if self.alpha_list.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return bad("alpha_list entries must be non-negative and finite".into());
        }
        if self.levels.iter().any(|(t, m)| !(*t > 0.0) || *m == 0) {
            return bad("levels need positive τ and mode counts".into());
        }

        use ExperimentKind::*;
        let ds = self.d as f64 * self.sigma;
        match self.experiment {
            LongRange => {
                if (ds - 1.0).abs() > 1e-14 {
                    return bad(format!("long_range needs d·σ = 1, got d·σ = {ds}"));
                }
                if self.tau_list.len() < 2 {
                    return bad("long_range needs at least two offsets in tau_list".into());
                }
            }
            FocusingSoliton => {
                if (ds - 1.0).abs() > 1e-14 || self.sign != -1 {
                    return bad("focusing_soliton runs the focusing cubic case: sigma = 1, sign = -1".into());
                }
                if self.alpha_list.is_empty() {
                    return bad("alpha_list must not be empty".into());
                }
            }
            Conservation => {
                if self.levels.is_empty() {
                    return bad("conservation needs at least one level".into());
                }
                if let Some((_, m)) = self.levels.iter().find(|(_, m)| *m > self.m) {
                    return bad(format!("level data size {m} exceeds the solver grid M = {}", self.m));
                }
                if !(ds > 1.0) {
                    return bad(format!("conservation runs the short-range pipeline (d·σ > 1), got {ds}"));
                }
            }
            SigmaBlowup | JGrowth => {
                let sigmas = if self.experiment == JGrowth { vec![self.sigma] } else { self.sigma_list.clone() };
                if sigmas.iter().any(|s| !(self.d as f64 * s > 1.0)) {
                    return bad("large-data runs need d·σ > 1".into());
                }
                if self.end_offset <= 0.0 {
                    return bad("large-data runs need end_offset > 0".into());
                }
            }
            SupercriticalSearch | RotatingPoint | RotatingConvergence | Visualize | ContinuitySigma => {
                if !(ds > 1.0) {
                    return bad(format!("{} needs d·σ > 1, got {ds}", self.experiment));
                }
                if self.experiment == RotatingConvergence && self.tau_list.len() < 2 {
                    return bad("rotating_convergence needs at least two τ values".into());
                }
                if self.experiment == ContinuitySigma && (self.eps_list.is_empty() || self.data_m == 0 || self.data_m > self.m) {
                    return bad("continuity_sigma needs eps_list and 0 < data_m ≤ M".into());
                }
            }
        }
        Ok(())
    }

    /// Flat `key = value` rendering, parseable by [`parse_config_text`].
    pub fn to_config_text(&self) -> String {
        let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("experiment", self.experiment.to_string());
        line("d", self.d.to_string());
        line("sigma", format!("{:e}", self.sigma));
        line("sigma_list", list(&self.sigma_list));
        line("sign", self.sign.to_string());
        line("M", self.m.to_string());
        line("tau", format!("{:e}", self.tau));
        line("seed", self.seed.to_string());
        line("num_samples", self.num_samples.to_string());
        line("amplitude", format!("{:e}", self.amplitude));
        line("output_dir", self.output_dir.display().to_string());
        line("full_scale", self.full_scale.to_string());
        line("data_m", self.data_m.to_string());
        line(
            "levels",
            self.levels.iter().map(|(t, m)| format!("{t:e}:{m}")).collect::<Vec<_>>().join(","),
        );
        line("tau_list", list(&self.tau_list));
        line("eps_list", list(&self.eps_list));
        line("alpha_list", list(&self.alpha_list));
        line("end_offset", format!("{:e}", self.end_offset));
        line("coupling", format!("{:e}", self.coupling));
        line("budget", self.budget.to_string());
        line("j", self.j.to_string());
        line("theta", format!("{:e}", self.theta));
        out
    }
}

fn canonical_key(key: &str) -> Result<&'static str> {
    const KEYS: [&str; 22] = [
        "experiment", "d", "sigma", "sigma_list", "sign", "M", "tau", "seed", "num_samples", "amplitude",
        "output_dir", "full_scale", "data_m", "levels", "tau_list", "eps_list", "alpha_list", "end_offset",
        "coupling", "budget", "j", "theta",
    ];
    let k = key.trim();
    let k = match k {
        "m" | "em" => "M",
        "out" => "output_dir",
        other => other,
    };
    KEYS.iter()
        .copied()
        .find(|c| *c == k)
        .ok_or_else(|| Error::Config(format!("unknown config key '{key}'")))
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse '{v}' for key '{key}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!("'{other}' is not a boolean (key '{key}')"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|s| parse_num(key, s.trim())).collect()
}

/// `tau:modes,tau:modes,…`
fn parse_levels(v: &str) -> Result<Vec<(f64, usize)>> {
    if v.trim().is_empty() {
        return Ok(vec![]);
    }
    v.split(',')
        .map(|item| {
            let (t, m) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("level '{item}' is not of the form tau:modes")))?;
            Ok((parse_num("levels", t.trim())?, parse_num("levels", m.trim())?))
        })
        .collect()
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{raw}'", n + 1)))?;
        canonical_key(k)?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

use lenscatter::experiments::config::{parse_config_text, ExperimentConfig, ExperimentKind};
use lenscatter::experiments::output::{is_numerical, read_metadata, write_diagnostic, write_report};
use lenscatter::experiments::random::{gen_random_state, scale_to_amplitude, RandomDataSpec, RandomKind};
use lenscatter::experiments::runners::{
    conservation_gaps, continuity_pair, ground_state_profile, random_sample, run, PLOT_GRID,
};
use lenscatter::lens_map::ScatterConfig;
use lenscatter::observables::sigma_norm;
use lenscatter::{AsymptoticState, Error, Nonlinearity, TransformPlan};

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn build(kind: ExperimentKind, cli: &[(&str, &str)]) -> ExperimentConfig {
    ExperimentConfig::build(kind, &[], &pairs(cli)).unwrap()
}

#[test]
fn random_data_is_reproducible_and_bounded() {
    let spec = RandomDataSpec::new(RandomKind::UnitSquare, 300, 42);
    let a = gen_random_state(&spec);
    assert_eq!(a, gen_random_state(&spec));
    assert_ne!(a, gen_random_state(&RandomDataSpec::new(RandomKind::UnitSquare, 300, 43)));
    assert!(a.coeffs().iter().all(|c| (0.0..=1.0).contains(&c.re) && (0.0..=1.0).contains(&c.im)));
    let w = gen_random_state(&RandomDataSpec::new(RandomKind::LambdaWeighted, 300, 42));
    for (m, (x, y)) in w.coeffs().iter().zip(a.coeffs()).enumerate() {
        assert!((x * (m as f64 + 0.5) - y).norm() < 1e-15);
    }
}

#[test]
fn weighted_sigma_norm_grows_like_log_m() {
    let mean = |m: usize| {
        (0..100u64)
            .map(|s| sigma_norm(&gen_random_state(&RandomDataSpec::new(RandomKind::LambdaWeighted, m, s))).powi(2))
            .sum::<f64>()
            / 100.0
    };
    let ratio = mean(400) / mean(200);
    let expected = 400f64.ln() / 200f64.ln();
    assert!((ratio / expected - 1.0).abs() < 0.2, "ratio {ratio} vs {expected}");
}

#[test]
fn amplitude_scaling_sets_the_peak() {
    let plan = TransformPlan::new(256).unwrap();
    let f = gen_random_state(&RandomDataSpec::new(RandomKind::LambdaWeighted, 256, 1));
    let g = scale_to_amplitude(&f, 10.0, &plan).unwrap();
    let peak = plan.synthesize(&g).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!((peak - 10.0).abs() < 1e-12);
    assert!(scale_to_amplitude(&lenscatter::SpectralField::zeros(8), 1.0, &TransformPlan::new(8).unwrap()).is_err());
}

#[test]
fn config_precedence_cli_over_file_over_defaults() {
    let file = parse_config_text("# comment\nsigma = 2.5\ntau = 0.02  # trailing\nM = 128\n\n").unwrap();
    let cli = pairs(&[("tau", "0.005"), ("em", "64")]);
    let cfg = ExperimentConfig::build(ExperimentKind::RotatingPoint, &file, &cli).unwrap();
    assert_eq!(cfg.sigma, 2.5);
    assert_eq!(cfg.tau, 0.005);
    assert_eq!(cfg.m, 64);
    assert_eq!(cfg.seed, ExperimentConfig::defaults(ExperimentKind::RotatingPoint).seed);
}

#[test]
fn config_text_round_trips() {
    let cfg = build(ExperimentKind::Conservation, &[("levels", "0.02:50,0.002:50"), ("num_samples", "3")]);
    let again = ExperimentConfig::build(ExperimentKind::Conservation, &parse_config_text(&cfg.to_config_text()).unwrap(), &[]).unwrap();
    assert_eq!(cfg, again);
}

#[test]
fn full_scale_preset_and_sweep_override() {
    let cfg = build(ExperimentKind::SigmaBlowup, &[("full_scale", "true")]);
    assert_eq!((cfg.m, cfg.tau), (8192, 2f64.powi(-14)));
    let cfg = build(ExperimentKind::SigmaBlowup, &[("full_scale", "true"), ("M", "1024")]);
    assert_eq!(cfg.m, 1024);
    let single = build(ExperimentKind::SigmaBlowup, &[("sigma", "1.3")]);
    assert_eq!(single.sigma_list, vec![1.3]);
}

#[test]
fn config_errors() {
    let err = |kind, items: &[(&str, &str)]| ExperimentConfig::build(kind, &[], &pairs(items)).unwrap_err();
    assert!(matches!(err(ExperimentKind::LongRange, &[("sigma", "2")]), Error::Config(_)));
    assert!(matches!(err(ExperimentKind::RotatingPoint, &[("tau", "-1")]), Error::Config(_)));
    assert!(matches!(err(ExperimentKind::RotatingPoint, &[("bogus", "1")]), Error::Config(_)));
    assert!(matches!(err(ExperimentKind::RotatingPoint, &[("M", "abc")]), Error::Config(_)));
    assert!(matches!(err(ExperimentKind::FocusingSoliton, &[("sign", "1")]), Error::Config(_)));
    assert!(matches!(err(ExperimentKind::Conservation, &[("levels", "0.1:4096")]), Error::Config(_)));
    assert!(matches!(err(ExperimentKind::RotatingPoint, &[("experiment", "visualize")]), Error::Config(_)));
    assert!(parse_config_text("no equals sign").is_err());
    assert!("nonsense".parse::<ExperimentKind>().is_err());
}

#[test]
fn zero_coupling_conservation_gaps_vanish() {
    let m = 64;
    let plan = TransformPlan::new(m).unwrap();
    let sc = ScatterConfig::short_range(2.0, Nonlinearity::Defocusing, m, 0.01).with_coupling(0.0);
    for k in 0..3 {
        let u = AsymptoticState::minus(random_sample(RandomKind::UnitSquare, 40, m, 9, k)).unwrap();
        let g = conservation_gaps(&u, &sc, &plan).unwrap();
        assert!(g[..4].iter().all(|x| *x <= 1e-10), "{g:?}");
    }
}

#[test]
fn conservation_gaps_shrink_with_tau_in_the_median() {
    let cfg = build(
        ExperimentKind::Conservation,
        &[("M", "128"), ("num_samples", "4"), ("levels", "0.1:24,0.01:24")],
    );
    let rep = run(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 8);
    let levels = rep.summary["levels"].as_array().unwrap();
    for name in ["kinetic", "momentum", "centre"] {
        let coarse = levels[0]["median"][name].as_f64().unwrap();
        let fine = levels[1]["median"][name].as_f64().unwrap();
        assert!(coarse > fine, "{name}: {coarse} vs {fine}");
    }
}

#[test]
fn visualize_writes_the_plot_grid() {
    let rep = run(&build(ExperimentKind::Visualize, &[("M", "128"), ("tau", "0.01")])).unwrap();
    assert_eq!(rep.rows.len(), PLOT_GRID.2);
    assert!(rep.summary["mass_gap"].as_f64().unwrap() < 1e-9);
    assert!(rep.summary["centre_gap"].as_f64().unwrap() < 0.05);
}

#[test]
fn long_range_zero_data_is_zero() {
    let rep = run(&build(ExperimentKind::LongRange, &[("amplitude", "1e-300"), ("tau_list", "0.0625,0.03125,0.015625")])).unwrap();
    let diffs = rep.summary["modulus_diffs"].as_array().unwrap();
    assert!(diffs.iter().all(|d| d.as_f64().unwrap() < 1e-290));
}

#[test]
fn zero_soliton_amplitude_stays_zero() {
    let rep = run(&build(
        ExperimentKind::FocusingSoliton,
        &[("M", "128"), ("tau", "0.01"), ("alpha_list", "0"), ("end_offset", "0.3")],
    ))
    .unwrap();
    assert!(rep.rows.iter().all(|r| r.split(',').nth(2).unwrap() == "0"));
    assert!((ground_state_profile(0.5, 0.0) - 1.0).abs() < 1e-15);
}

#[test]
fn identical_powers_give_identical_trajectories() {
    let cfg = build(ExperimentKind::ContinuitySigma, &[("M", "64"), ("tau", "0.01")]);
    let plan = TransformPlan::new(64).unwrap();
    let u = AsymptoticState::minus(random_sample(RandomKind::UnitSquare, 8, 64, 1, 0)).unwrap();
    let (sup, trace) = continuity_pair(&cfg, &u, 0.0, &plan).unwrap();
    assert_eq!(sup, 0.0);
    assert_eq!(trace.len(), 316);
}

#[test]
fn sidecar_replay_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = build(ExperimentKind::RotatingPoint, &[("M", "32"), ("tau", "0.01"), ("out", out)]);
    let rep = run(&cfg).unwrap();
    let files = write_report(&cfg, &rep, "20260101T000000").unwrap();
    assert!(files.csv.ends_with("rotating_point_20260101T000000.csv"));
    let meta = read_metadata(&files.meta).unwrap();
    assert_eq!(meta.config, cfg);
    assert_eq!(meta.substep_order, "nonlinear-then-linear");
    assert!(meta.rng.contains("ChaCha8"));
    let replay = run(&meta.config).unwrap();
    let files2 = write_report(&meta.config, &replay, "20260101T000001").unwrap();
    assert_eq!(std::fs::read(&files.csv).unwrap(), std::fs::read(&files2.csv).unwrap());
    let text = std::fs::read_to_string(&files.csv).unwrap();
    assert!(text.starts_with("j,theta,nu,M,tau,"));
}

#[test]
fn numerical_aborts_are_classified_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = build(ExperimentKind::RotatingPoint, &[("out", dir.path().to_str().unwrap())]);
    let err = Error::Propagation {
        step: 7,
        t_lens: 0.5,
        reason: "non-finite coefficients".into(),
    };
    assert!(is_numerical(&err));
    assert!(!is_numerical(&Error::Config("x".into())));
    let path = write_diagnostic(&cfg, &err, "T0").unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["details"]["step"], 7);
}

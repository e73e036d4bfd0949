//! `lenscatter <experiment> [--config FILE] [overrides]` or `lenscatter --replay META`.
//!
//! Exit status: 0 on success, 2 for bad configuration, 3 when the numerics
//! abort (a `.error.json` diagnostic is written next to the outputs).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lenscatter::experiments::{
    is_numerical, read_config_file, read_metadata, run, write_diagnostic, write_report, ExperimentConfig,
    ExperimentKind,
};
use lenscatter::Error;

#[derive(Parser, Debug)]
#[command(name = "lenscatter", version, about = "Scattering-operator experiments on the Hermite basis")]
struct Args {
    /// One of: visualize, conservation, rotating_point, rotating_convergence,
    /// supercritical_search, long_range, sigma_blowup, j_growth,
    /// focusing_soliton, continuity_sigma
    #[arg(required_unless_present = "replay")]
    experiment: Option<String>,

    /// Flat `key = value` file; `#` starts a comment.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    /// Number of Hermite modes M.
    #[arg(long, value_name = "M")]
    em: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// High-resolution preset (M=8192, τ=2^-14) for the large-data and soliton runs.
    #[arg(long)]
    full_scale: bool,

    /// Any other config key, repeatable: `--set levels=0.1:100,0.01:200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Re-run from a `.meta.json` sidecar and compare with the CSV beside it.
    #[arg(long, value_name = "META", conflicts_with_all = ["experiment", "config"])]
    replay: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

fn overrides(args: &Args) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    let named = [
        ("sigma", &args.sigma),
        ("tau", &args.tau),
        ("M", &args.em),
        ("seed", &args.seed),
        ("amplitude", &args.amplitude),
    ];
    for (k, v) in named {
        if let Some(v) = v {
            pairs.push((k.to_string(), v.clone()));
        }
    }
    if let Some(out) = &args.out {
        pairs.push(("output_dir".into(), out.display().to_string()));
    }
    if args.full_scale {
        pairs.push(("full_scale".into(), "true".into()));
    }
    for s in &args.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn config_failure(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn timestamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string()
}

fn execute(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let ts = timestamp();
    match run(cfg) {
        Ok(report) => {
            let files = write_report(cfg, &report, &ts).map_err(config_failure)?;
            println!("{}", files.csv.display());
            println!("{}", files.meta.display());
            println!("{}", report.summary);
            Ok(())
        }
        Err(e) if is_numerical(&e) => {
            let msg = match write_diagnostic(cfg, &e, &ts) {
                Ok(p) => format!("{e} (diagnostic: {})", p.display()),
                Err(w) => format!("{e} (diagnostic not written: {w})"),
            };
            Err(Failure::Numerical(msg))
        }
        Err(e) => Err(config_failure(e)),
    }
}

fn replay(meta_path: &PathBuf, args: &Args) -> Result<(), Failure> {
    let meta = read_metadata(meta_path).map_err(config_failure)?;
    let mut cfg = meta.config.clone();
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    let report = run(&cfg).map_err(|e| {
        if is_numerical(&e) {
            Failure::Numerical(e.to_string())
        } else {
            config_failure(e)
        }
    })?;
    let ts = timestamp();
    let files = write_report(&cfg, &report, &ts).map_err(config_failure)?;
    println!("{}", files.csv.display());
    let name = meta_path.to_string_lossy();
    let original = PathBuf::from(name.strip_suffix(".meta.json").unwrap_or(&name).to_string() + ".csv");
    match fs::read_to_string(&original) {
        Ok(old) if old == report.csv() => println!("replay identical to {}", original.display()),
        Ok(_) => println!("replay DIFFERS from {}", original.display()),
        Err(_) => println!("no original CSV at {}; nothing compared", original.display()),
    }
    Ok(())
}

fn main_inner(args: &Args) -> Result<(), Failure> {
    if let Some(meta) = &args.replay {
        return replay(meta, args);
    }
    let name = args.experiment.as_deref().unwrap_or_default();
    let kind: ExperimentKind = name.parse().map_err(config_failure)?;
    let file = match &args.config {
        Some(p) => read_config_file(p).map_err(config_failure)?,
        None => Vec::new(),
    };
    let cli = overrides(args)?;
    let cfg = ExperimentConfig::build(kind, &file, &cli).map_err(config_failure)?;
    execute(&cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("lenscatter: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("lenscatter: numerical abort: {m}");
            ExitCode::from(3)
        }
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lenscatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lenscatter")).args(args).output().unwrap()
}

fn files_with_suffix(dir: &Path, suffix: &str) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    v.sort();
    v
}

#[test]
fn run_writes_csv_and_sidecar_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small visualize run\nexperiment = visualize\nM = 64\ntau = 0.05\n").unwrap();
    let out = dir.path().join("out");
    let o = lenscatter(&[
        "visualize",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "0.02",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = files_with_suffix(&out, ".csv");
    let meta = files_with_suffix(&out, ".meta.json");
    assert_eq!((csv.len(), meta.len()), (1, 1));
    let text = fs::read_to_string(&csv[0]).unwrap();
    assert_eq!(text.lines().count(), 2002);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&meta[0]).unwrap()).unwrap();
    // CLI beats file, file beats defaults
    assert_eq!(m["config"]["tau"], 0.02);
    assert_eq!(m["config"]["m"], 64);
    assert!(m["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn replay_from_sidecar_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("first");
    let o = lenscatter(&[
        "conservation",
        "--em",
        "64",
        "--set",
        "levels=0.1:16",
        "--set",
        "num_samples=3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = files_with_suffix(&out, ".meta.json").remove(0);
    let again = dir.path().join("second");
    let o = lenscatter(&["--replay", meta.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("replay identical"));
}

#[test]
fn config_errors_exit_with_2() {
    assert_eq!(lenscatter(&["no_such_experiment"]).status.code(), Some(2));
    assert_eq!(lenscatter(&["long_range", "--sigma", "2"]).status.code(), Some(2));
    assert_eq!(lenscatter(&["visualize", "--tau", "-1"]).status.code(), Some(2));
    assert_eq!(lenscatter(&["visualize", "--config", "/nonexistent/file.cfg"]).status.code(), Some(2));
    assert_eq!(lenscatter(&["visualize", "--set", "nonsense=1"]).status.code(), Some(2));
}

#[test]
fn numerical_abort_exits_with_3_and_writes_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = lenscatter(&[
        "sigma_blowup",
        "--sigma",
        "1.5",
        "--em",
        "32",
        "--tau",
        "0.05",
        "--amplitude",
        "1e200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = files_with_suffix(&out, ".error.json");
    assert_eq!(diag.len(), 1);
    let d: serde_json::Value = serde_json::from_str(&fs::read_to_string(&diag[0]).unwrap()).unwrap();
    assert_eq!(d["details"]["kind"], "propagation");
}

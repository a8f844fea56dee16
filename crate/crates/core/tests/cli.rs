use std::fs;
use std::path::Path;
use std::process::Command;

const CONFIG: &str = r#"
sampler = "mams"
budget = 3000
chains = 2
seed = 4

[model]
name = "standard_gaussian"
dim = 4
"#;

fn mams(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mams")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sample_writes_outputs_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = mams(&["sample", "--config", &cfg, "--seed", "9", "--chains", "3", "--budget", "5000", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "summary.csv", "manifest.toml"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 9"));
    assert!(manifest.contains("budget = 5000"));
    assert!(manifest.contains("chain_seeds = [9, 10, 11]"));
}

#[test]
fn tune_and_grid_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let o = mams(&["tune", "--config", &cfg, "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tuned = fs::read_to_string(Path::new(out).join("tuned.toml")).unwrap();
    assert!(tuned.contains("step_size"));

    let o = mams(&["grid-l", "--config", &cfg, "--out", out, "--lengths", "1,2.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(Path::new(out).join("grid_l.csv")).unwrap();
    assert_eq!(grid.lines().count(), 3);
    assert!(grid.starts_with("trajectory_length,step_size,accept_rate,gradients_to_threshold"));
}

#[test]
fn bad_configs_exit_with_their_category() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sampler = \"mams\"\nbudget = 10\nbogus = 1\n[model]\nname = \"banana\"\n");
    let o = mams(&["sample", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write_config(dir.path(), "sampler = \"mams\"\nbudget = 10\n[model]\nname = \"bimodal\"\na = 1.5\n");
    let o = mams(&["sample", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = mams(&["sample", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

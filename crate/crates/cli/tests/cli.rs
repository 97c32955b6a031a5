use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 42

[simulate]
seeds = [[3, 0], [8, 8]]
trials = 4

[simulate.graph]
sizes = [200, 150]
edge_probs = [[0.03, 0.01], [0.01, 0.04]]
r = 2

[sweep_alpha]
alpha = [0.5, 1.5]
direction = [1.0, 1.0]
trials = 3

[sweep_alpha.graph]
sizes = [200, 200]
edge_probs = [[0.02, 0.006], [0.006, 0.02]]
r = 2

[classify]
alphas = [[0.2, 0.1], [0.9, 0.9]]

[classify.model]
r = 2
identical = { k = 2, psi = 0.333333333333 }

[critical_curve]
theta = { min = 0.1, max = 10.0, count = 8 }

[critical_curve.model]
r = 2
chi = [[1.0, 0.4], [0.2, 1.0]]

[allocations]
psi = 0.2
r = [2]
k_min = 2
k_max = 4
"#;

fn sbmperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbmperc")).args(args).output().unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    fs::write(&config, CONFIG).unwrap();
    let config = config.to_str().unwrap();
    for mode in ["simulate", "sweep-alpha", "classify", "critical-curve", "allocations"] {
        let runs: Vec<_> = ["1", "3"]
            .iter()
            .map(|w| {
                let out = tmp.path().join(format!("{mode}-{w}"));
                let o = sbmperc(&[mode, "--config", config, "--workers", w, "--out", out.to_str().unwrap()]);
                assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
                files(&out)
            })
            .collect();
        assert!(!runs[0].is_empty(), "{mode}: nothing written");
        assert_eq!(runs[0], runs[1], "{mode}");
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    fs::write(&config, CONFIG).unwrap();
    let config = config.to_str().unwrap();
    let run = |seed: &str, name: &str| {
        let out = tmp.path().join(name);
        let o = sbmperc(&["simulate", "--config", config, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        files(&out)
    };
    assert_eq!(run("42", "a"), run("42", "b"));
    assert_ne!(run("42", "c"), run("43", "d"));
}

#[test]
fn missing_seed_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    fs::write(&config, CONFIG.replace("seed = 42", "")).unwrap();
    let out = tmp.path().join("out");
    let o = sbmperc(&["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn unreadable_config_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sbmperc(&["classify", "--config", tmp.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_check_passes_with_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("oracle");
    let o = sbmperc(&["oracle-check", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"all_passed\": true"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("summary.json"));
}

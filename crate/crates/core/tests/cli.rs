use std::path::Path;
use std::process::Command;

use afpy::tensor::read_tensor;

fn afpy(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_afpy")).args(args).output().unwrap();
    assert!(out.status.success(), "afpy {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthetic scene with noisy affinities under `dir`.
fn prepare(dir: &Path) {
    afpy(&["--seed", "5", "synth", "--height", "72", "--width", "72", "--num-instances", "6", "--out-dir", s(dir)]);
    let gt = dir.join("gt");
    let noisy = dir.join("noisy");
    afpy(&["gt-affinity", "--instances", s(&dir.join("instances.afpy")), "--levels", "4", "--out-dir", s(&gt)]);
    afpy(&[
        "perturb", "--flip-prob", "0.05", "--logistic-sigma", "1.0", "--seed", "9",
        "--affinity-dir", s(&gt), "--out-dir", s(&noisy),
    ]);
}

#[test]
fn segment_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path());
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("seg{threads}"));
        afpy(&[
            "--threads", threads, "segment", "--affinity-dir", s(&dir.path().join("noisy")),
            "--scores", s(&dir.path().join("scores.afpy")), "--out-dir", s(&out),
        ]);
        runs.push((
            std::fs::read(out.join("instances.afpy")).unwrap(),
            std::fs::read(out.join("instances.json")).unwrap(),
        ));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"scene": {"height": 40, "width": 36, "num_instances": 2}}"#).unwrap();
    afpy(&["--config", s(&cfg), "synth", "--out-dir", s(dir.path())]);
    assert_eq!(read_tensor(dir.path().join("instances.afpy")).unwrap().dims(), vec![40, 36]);
    afpy(&["--config", s(&cfg), "synth", "--height", "24", "--out-dir", s(dir.path())]);
    assert_eq!(read_tensor(dir.path().join("instances.afpy")).unwrap().dims(), vec![24, 36]);
}

#[test]
fn noise_free_round_trip_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    afpy(&[
        "synth", "--height", "64", "--width", "64", "--num-instances", "3", "--occlusion", "false",
        "--min-size", "12", "--max-size", "24", "--out-dir", s(d),
    ]);
    afpy(&["gt-affinity", "--instances", s(&d.join("instances.afpy")), "--out-dir", s(&d.join("gt"))]);
    afpy(&["segment", "--affinity-dir", s(&d.join("gt")), "--scores", s(&d.join("scores.afpy")), "--out-dir", s(d)]);
    let report = afpy(&[
        "evaluate", "--pred", s(&d.join("instances.json")), "--gt-instances", s(&d.join("instances.afpy")),
        "--gt-classes", s(&d.join("classes.afpy")),
    ]);
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["ap"]["mean"], 1.0);
    assert_eq!(v["panoptic"]["pq"], 1.0);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_afpy"))
        .args(["segment", "--affinity-dir", "/nonexistent", "--scores", "/nonexistent/s.afpy"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}

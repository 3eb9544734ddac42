//! End-to-end tests of the command-line surface: artifact emission, flag
//! overrides, comparison output, and error reporting.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn leosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leosim"))
        .args(args)
        .output()
        .expect("spawn leosim")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// The shipped default config shrunk to a few seconds on a small shell.
fn small_config(dir: &Path) -> PathBuf {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let mut cfg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(shipped).unwrap()).unwrap();
    cfg["constellation"]["num_planes"] = 4.into();
    cfg["constellation"]["sats_per_plane"] = 4.into();
    cfg["gateways"].as_array_mut().unwrap().truncate(3);
    cfg["traffic"]["per_gateway_rate"] = 10.0.into();
    cfg["traffic"]["duration_s"] = 3.0.into();
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn simulate_writes_artifacts_and_summary_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("run");
    let out = leosim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out);
    assert!(
        line.contains("created") && line.contains("mean_latency_s"),
        "{line}"
    );
    for f in ["packets.csv", "summary.csv", "latency.svg"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    assert!(!out_dir.join("training.csv").exists());
}

#[test]
fn seed_flag_overrides_traffic_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("run");
    let out = leosim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "42",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.contains("traffic_seed,42"), "{summary}");
}

#[test]
fn train_then_exploit_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let train_dir = tmp.path().join("train");
    let out = leosim(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        train_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let weights = train_dir.join("weights.bin");
    assert!(weights.exists());
    assert!(train_dir.join("training.csv").exists());

    let exploit_dir = tmp.path().join("exploit");
    let out = leosim(&[
        "exploit",
        "--config",
        cfg.to_str().unwrap(),
        "--weights",
        weights.to_str().unwrap(),
        "--out",
        exploit_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(exploit_dir.join("weights_p0_s0.bin").exists());
    assert!(exploit_dir.join("weights_p3_s3.bin").exists());
}

#[test]
fn compare_requires_matching_traffic_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    for (dir, seed) in [(&a, "1"), (&b, "1"), (&c, "9")] {
        let out = leosim(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }

    let cmp_dir = tmp.path().join("cmp");
    let out = leosim(&[
        "compare",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        cmp_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(cmp_dir.join("comparison.csv").exists());
    assert!(cmp_dir.join("overlay.svg").exists());
    // A run compared with itself reports a unit ratio.
    assert!(stdout(&out).contains(",1"), "{}", stdout(&out));

    let out = leosim(&[
        "compare",
        a.to_str().unwrap(),
        c.to_str().unwrap(),
        "--out",
        cmp_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("seed"), "{}", stderr(&out));
}

#[test]
fn bad_router_flag_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = leosim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--router",
        "ospf",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown router"), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    v["simulator"]["quue_capacity"] = 5.into();
    std::fs::write(&cfg, serde_json::to_string(&v).unwrap()).unwrap();
    let out = leosim(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("quue_capacity"), "{}", stderr(&out));
}

#[test]
fn invalid_value_error_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    v["phase"]["epsilon_start"] = 1.5.into();
    std::fs::write(&cfg, serde_json::to_string(&v).unwrap()).unwrap();
    let out = leosim(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("phase.epsilon_start"),
        "{}",
        stderr(&out)
    );
}

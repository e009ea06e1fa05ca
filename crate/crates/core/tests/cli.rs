use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardylab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

const DISK: &str = r#"{
    "domain": {"shape": {"kind": "ball", "center": [0, 0], "radius": 1}},
    "grid": {"m": 48},
    "p": {"kind": "affine", "gradient": [0.2, 0.1], "offset": 1.8},
    "alpha": 0.3,
    "family": {"count": 2},
    "weight": "a_omega"
}"#;

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("MANIFEST.json")).unwrap()).unwrap()
}

#[test]
fn commands_write_artifacts_and_manifests() {
    let dir = scratch("commands");
    let config = write_config(&dir, DISK);
    for (cmd, files) in [
        ("norm", vec!["norm.json", "density.csv"]),
        ("potential", vec!["potential.csv", "potential.json"]),
        ("derivative", vec!["derivative.csv", "derivative.json"]),
        ("maximal", vec!["maximal.csv", "maximal.json"]),
        ("weights", vec!["a_omega.csv", "a_omega.json"]),
        ("invert", vec!["invert.csv", "invert.json"]),
        ("hardy", vec!["hardy.csv", "hardy.json"]),
    ] {
        let out = dir.join(cmd);
        let status = bin().args([cmd, "--config"]).arg(&config).arg("--out").arg(&out).status().unwrap();
        assert!(status.code().is_some_and(|c| c <= 1), "{cmd}: {status}");
        for f in files {
            assert!(out.join(f).exists(), "{cmd}: missing {f}");
        }
        let m = manifest(&out);
        assert_eq!(m["command"], cmd);
        assert_eq!(m["complete"], true);
        assert_eq!(m["config"]["alpha"], 0.3);
        assert_eq!(m["config"]["grid"]["m"], 48);
        assert_eq!(m["seed"], 42);
    }
    let header = std::fs::read_to_string(dir.join("hardy/hardy.csv")).unwrap();
    assert!(header.starts_with("member_id,kind,lhs,rhs,ratio\n"));
}

#[test]
fn kernels_on_defaults_lists_cancellation_and_decay() {
    let dir = scratch("kernels");
    let config = write_config(
        &dir,
        r#"{"domain": {"shape": {"kind": "interval", "a": -1, "b": 1}}, "p": {"kind": "const", "value": 2}, "alpha": 0.25}"#,
    );
    let status = bin().args(["kernels", "--config"]).arg(&config).arg("--out").arg(dir.join("out")).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("out/kernels.csv")).unwrap();
    assert!(csv.starts_with("identity,parameters,residual,budget\n"));
    assert!(csv.lines().any(|l| l.starts_with("cancellation,")));
    assert!(csv.lines().any(|l| l.starts_with("decay,")));
}

#[test]
fn seed_and_workers_do_not_change_tables_except_through_the_seed() {
    let dir = scratch("determinism");
    let config = write_config(&dir, DISK);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.join(name);
        let status = bin().args(["hardy", "--config"]).arg(&config).arg("--out").arg(&out).args(extra).status().unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(out.join("hardy.csv")).unwrap()
    };
    let a = run("w1", &["--workers", "1"]);
    assert_eq!(a, run("w2", &["--workers", "2"]));
    assert_eq!(a, run("w3", &["--workers", "3"]));
    assert_ne!(a, run("s7", &["--seed", "7"]));
    assert_eq!(manifest(&dir.join("s7"))["config"]["family"]["seed"], 7);
}

#[test]
fn exit_codes() {
    let dir = scratch("exits");
    let good = write_config(&dir, DISK);
    let status = bin().args(["frobnicate", "--config"]).arg(&good).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(!status.stderr.is_empty());

    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"domain\": ").unwrap();
    let out = bin().args(["norm", "--config"]).arg(&bad).arg("--out").arg(dir.join("bad")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte"));

    std::fs::write(&bad, DISK.replace("0.3", "1.0")).unwrap();
    let out = bin().args(["norm", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must be < min(1, n/p_plus)"));

    // A missing density file fails at run time, after the config has been
    // accepted; the manifest records the incomplete run.
    let missing = dir.join("missing.json");
    std::fs::write(&missing, DISK.replace(r#""p": {"kind": "affine", "gradient": [0.2, 0.1], "offset": 1.8}"#, r#""p": {"kind": "const", "value": 2}, "density": {"kind": "csv", "path": "nowhere.csv"}"#)).unwrap();
    let out_dir = dir.join("partial");
    let out = bin().args(["norm", "--config"]).arg(&missing).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let m = manifest(&out_dir);
    assert_eq!(m["complete"], false);
    assert!(m["error"].as_str().unwrap().len() > 0);
}

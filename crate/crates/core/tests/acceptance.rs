//! End-to-end acceptance run: the full suite through `report-all`, repeated
//! at several worker counts, with one line per criterion.

use hardylab::cli::suite::worker_counts;
use hardylab::cli::{parse_config_str, run_config, Command, Exit};
use std::io::Write;
use std::path::{Path, PathBuf};

const INTERVAL_REFERENCE: &str = r#"{
    "domain": {"shape": {"kind": "interval", "a": -1, "b": 1}},
    "p": {"kind": "affine", "gradient": [0.3], "offset": 1.8},
    "alpha": 0.25
}"#;

fn run_report(dir: &Path, workers: usize) -> (Exit, String, serde_json::Value) {
    let cfg = parse_config_str(INTERVAL_REFERENCE, Path::new("."))
        .unwrap()
        .with_overrides(None, Some(dir.to_path_buf()))
        .unwrap();
    let outcome = run_config(Command::ReportAll, &cfg, Some(workers));
    assert!(outcome.error.is_none(), "{:?}", outcome.error);
    let csv = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    let report = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    (outcome.exit, csv, report)
}

#[test]
fn acceptance() {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = std::fs::remove_dir_all(&root);
    let counts = worker_counts();
    let (exit, first_csv, report) = run_report(&root.join("run-0"), counts[0]);
    let mut csvs = vec![first_csv.clone()];
    let (_, again, _) = run_report(&root.join("run-0-again"), counts[0]);
    csvs.push(again);
    for (k, &w) in counts.iter().enumerate().skip(1) {
        csvs.push(run_report(&root.join(format!("run-{k}")), w).1);
    }
    let identical = csvs.iter().all(|c| *c == first_csv);

    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 13);
    let mut all_pass = true;
    for c in criteria {
        let id = c["id"].as_u64().unwrap();
        let mut pass = c["pass"].as_bool().unwrap();
        let mut note = String::new();
        if id == 13 {
            pass &= identical;
            note = format!(" report-all CSVs identical over {} runs at workers {counts:?}: {identical}", csvs.len());
        }
        all_pass &= pass;
        // Written to the raw handle so the lines survive output capture.
        writeln!(
            std::io::stdout(),
            "criterion {id:2} {:<22} {} observed {:e} threshold {:e}{note}",
            c["name"].as_str().unwrap(),
            if pass { "PASS" } else { "FAIL" },
            c["observed"].as_f64().unwrap_or(f64::NAN),
            c["threshold"].as_f64().unwrap(),
        )
        .unwrap();
    }
    assert!(all_pass, "some acceptance criteria failed");
    assert_eq!(exit, Exit::Ok);
}

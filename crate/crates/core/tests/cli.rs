use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qvdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvdp")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let o = qvdp(&["run", "fig9", "-q"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment 'fig9'"));

    let o = qvdp(&["run", "zeno-spectrum", "--set", "n_trajectories=5", "-q"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("'n_trajectories'"));

    let o = qvdp(&["run", "zeno-spectrum", "--set", "n_traj=lots"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qvdp(&["run"]).status.code(), Some(2));
}

#[test]
fn validate_reports_violations() {
    let o = qvdp(&["validate", "wigner-panels"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("ok"));

    let o = qvdp(&["validate", "wigner-panels", "--set", "delta_ts=[inf, 0.001]", "--set", "n_traj=0"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("shorter than dt"), "{text}");
    assert!(text.contains("n_traj must be at least 1"), "{text}");

    let o = qvdp(&["validate", "wigner-panels", "--paper-scale"]);
    assert!(stdout(&o).contains("500000 trajectories"));
}

#[test]
fn keys_lists_defaults() {
    let o = qvdp(&["keys", "coupled-sync"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for k in ["mu", "delta_omega", "repetitions", "delta_t"] {
        assert!(text.lines().any(|l| l.starts_with(k)), "{k} missing from\n{text}");
    }
}

#[test]
fn numerical_guard_exits_3() {
    // occupation 4.9 passes the dim/4 guard, but the population tail reaches
    // the top of a 20-level space
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    let o = qvdp(&[
        "run",
        "dichotomic-survival",
        "-q",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "dim=20",
        "--set",
        "kappa2=0.01282",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("truncation"));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn run_writes_outputs_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    fs::write(&cfg, "experiment = \"threshold-scan\"\ntotal_time = 30\nrepeats = 4\nratios = [1e-4, 1e-3]\n").unwrap();
    let out = dir.path().join("scan");
    let o = qvdp(&[
        "run",
        "threshold-scan",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "repeats=2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("threshold-scan: kappa2/kappa1=1e-4"));

    let m = manifest(&out);
    assert_eq!(m["experiment"], "threshold-scan");
    assert_eq!(m["config"]["repeats"], 2);
    assert_eq!(m["config"]["total_time"], 30.0);
    assert_eq!(m["config"]["ratios"], serde_json::json!([1e-4, 1e-3]));
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    let csv = fs::read_to_string(out.join("scan.csv")).unwrap();
    assert!(csv.contains("# threshold_ratio=") && csv.contains("kappa_ratio,q_n,q_n_std"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");

    let manifest_path = out.join("manifest.json");
    let again = dir.path().join("again");
    let o = qvdp(&["replay", manifest_path.to_str().unwrap(), "--out", again.to_str().unwrap(), "--workers", "3", "-q"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).is_empty());
    assert_eq!(fs::read(out.join("scan.csv")).unwrap(), fs::read(again.join("scan.csv")).unwrap());

    let mut tampered = m.clone();
    tampered["outputs"][0]["sha256"] = "00".into();
    let bad = dir.path().join("tampered.json");
    fs::write(&bad, serde_json::to_vec(&tampered).unwrap()).unwrap();
    let o = qvdp(&["replay", bad.to_str().unwrap(), "--out", dir.path().join("t").to_str().unwrap(), "-q"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scan.csv differs"));
}

#[test]
fn wigner_panels_grid_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wp");
    let o = qvdp(&[
        "run",
        "wigner-panels",
        "-q",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "n_traj=400",
        "--set",
        "times=[0, 6, 12, 18]",
        "--set",
        "extent=4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(&out);
    let names: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap()).collect();
    // three schedules by four times, plus the summary table
    assert_eq!(names.len(), 13);
    assert!(names.contains(&"wigner_dtinf_t18.csv") && names.contains(&"wigner_dt1_t6.csv"));
    let text = fs::read_to_string(out.join("wigner_dt10_t12.csv")).unwrap();
    let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    for key in ["# delta_t=10", "# h=0.1", "# n_total=400"] {
        assert!(meta.contains(&key), "{key} not in {meta:?}");
    }
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 81 * 81);
}

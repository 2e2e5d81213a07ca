//! End-to-end tests of the command-line interface: exit codes, artifact
//! schemas, and the reproducibility of reports.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermoelast"))
}

fn read_report(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("report.json")).expect("report.json exists");
    serde_json::from_str(&text).expect("valid json")
}

fn without_meta(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("meta");
    v
}

#[test]
fn simulate_minimal_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "simulate",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "n_interior=50",
            "--set",
            "t_final=1.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,E,dissipation,norm_w1,norm_w1dot,norm_w2,norm_w3"
    );
    assert_eq!(lines.count(), 1001);
    let report = read_report(dir.path());
    assert_eq!(report["aggregate_pass"], true);
    assert_eq!(report["command"], "simulate");
}

#[test]
fn simulate_zero_initial_energy_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "simulate",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "n_interior=20",
            "--set",
            "t_final=0.5",
            "--set",
            "dt=0.01",
            "--set",
            "initial=zero",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let e: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(e, 0.0);
    }
}

#[test]
fn bad_config_exits_one_naming_key() {
    let out = bin().args(["simulate", "--set", "dt=0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let out = bin()
        .args(["simulate", "--set", "not_a_key=3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));
}

#[test]
fn config_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "n_interior = 24\ntau = 2.0\nt_final = 0.5\ndt = 0.01\n").unwrap();
    let out = bin()
        .args([
            "simulate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_report(dir.path());
    assert_eq!(report["config"]["n_interior"], 24);
    assert_eq!(report["config"]["tau"], 2.0);
}

#[test]
fn spectrum_rows_match_eigenvalue_count() {
    let dir = tempfile::tempdir().unwrap();
    let n = 20usize;
    let out = bin()
        .args([
            "spectrum",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            &format!("n_interior={n}"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "re,im,residual");
    // cattaneo state dimension is 4n + 1
    assert_eq!(csv.lines().count() - 1, 4 * n + 1);
}

#[test]
fn resolvent_spike_flag_on_conservative_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "resolvent",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "n_interior=30",
            "--set",
            "kind=conservative_cattaneo",
            "--set",
            "beta_grid.min=1.0",
            "--set",
            "beta_grid.max=20.0",
            "--set",
            "beta_grid.points=60",
            "--set",
            "beta_grid.log=false",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
            .unwrap();
    assert_eq!(fit["flags"]["spike_detected"], true);
    assert_eq!(fit["flags"]["fit_refused"], true);
    let scan = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(scan.lines().next().unwrap(), "beta,resolvent_norm");
}

#[test]
fn decay_emits_fit_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "decay",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "n_interior=40",
            "--set",
            "t_final=10.0",
            "--set",
            "dt=0.01",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
            .unwrap();
    assert_eq!(fit["model"], "exponential");
    assert!(fit["params"]["rate"].as_f64().unwrap() > 0.0);
    // conservative kind is rejected as a usage error
    let out = bin()
        .args(["decay", "--set", "kind=conservative_cattaneo"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn observability_json_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "observability",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "n_interior=30",
            "--set",
            "t_final=2.5",
            "--set",
            "dt=0.01",
            "--set",
            "n_max=8",
            "--set",
            "trials=20",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let obs: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("observability.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(obs["T"], 2.5);
    assert!(obs["c_obs"].as_f64().unwrap() > 0.0);
    assert_eq!(obs["kernel_dim"], 1);
    assert_eq!(obs["minimizing_direction_norms"].as_array().unwrap().len(), 4);
    assert!(obs["ingham_min_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_quick_is_deterministic_modulo_meta() {
    // same config + seed twice: identical reports once the isolated
    // volatile block is removed
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = bin()
            .args([
                "verify",
                "--seed",
                "7",
                "--out",
                d.path().to_str().unwrap(),
                "--set",
                "quick=true",
            ])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "verify failed: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
    let r1 = without_meta(read_report(d1.path()));
    let r2 = without_meta(read_report(d2.path()));
    assert_eq!(
        serde_json::to_string(&r1).unwrap(),
        serde_json::to_string(&r2).unwrap()
    );
}

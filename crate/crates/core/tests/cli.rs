use std::fs;
use std::path::PathBuf;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_levylab");

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("levylab-cli-{name}"));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn distance_subcommand_all_metrics() {
    let dir = tmp_dir("distance");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    fs::write(
        &a,
        r#"{"dim":1,"u0":[0.0],"kind":"step","points":[{"t":0.5,"v":[1.0]}]}"#,
    )
    .unwrap();
    fs::write(
        &b,
        r#"{"dim":1,"u0":[0.0],"kind":"step","points":[{"t":0.25,"v":[0.5]},{"t":0.5,"v":[1.0]}]}"#,
    )
    .unwrap();
    for metric in ["dtilde", "hausdorff", "m2", "j1"] {
        let (ok, stdout, stderr) = run(&[
            "distance",
            "--metric",
            metric,
            "--delta",
            "0.001",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
        ]);
        assert!(ok, "metric {metric} failed: {stderr}");
        let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        assert!(v["value"].is_number() && v["error_bound"].is_number());
        assert!(v["method"].is_string());
    }
    // the one-jump vs two-half-jump pair has quotient distance 1/2
    let (_, stdout, _) = run(&[
        "distance",
        "--metric",
        "dtilde",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn decorate_then_psi_round_trip() {
    let dir = tmp_dir("decorate");
    let profiles = dir.join("profiles.json");
    let levy = dir.join("levy.json");
    fs::write(
        &profiles,
        r#"[{"dim":1,"u0":[0.0],"kind":"polyline","points":[{"t":0.0,"v":[0.0]},{"t":1.0,"v":[1.0]}]}]"#,
    )
    .unwrap();
    fs::write(
        &levy,
        r#"{"dim":1,"u0":[0.0],"kind":"step","points":[{"t":0.5,"v":[1.0]}]}"#,
    )
    .unwrap();
    let (ok, stdout, stderr) = run(&[
        "decorate",
        "--profiles",
        profiles.to_str().unwrap(),
        levy.to_str().unwrap(),
    ]);
    assert!(ok, "{stderr}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["excursions"].as_array().unwrap().len(), 1);
    let dec = dir.join("dec.json");
    fs::write(&dec, &stdout).unwrap();
    let (ok, stdout, stderr) = run(&["psi", dec.to_str().unwrap()]);
    assert!(ok, "{stderr}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["kind"], "step");
}

#[test]
fn simulate_emits_one_path_per_line() {
    let (ok, stdout, stderr) = run(&[
        "simulate",
        "--map",
        "doubling",
        "--alpha",
        "0.75",
        "--n",
        "100",
        "--samples",
        "3",
        "--seed",
        "5",
    ]);
    assert!(ok, "{stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 100);
    }
}

#[test]
fn induce_emits_csv_header_and_rows() {
    let (ok, stdout, stderr) = run(&[
        "induce",
        "--map",
        "tripling",
        "--alpha",
        "0.5",
        "--samples",
        "5",
        "--seed",
        "7",
    ]);
    assert!(ok, "{stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "x0,R,V_1");
    assert_eq!(lines.len(), 6);
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 3);
    }
}

#[test]
fn stable_sample_and_chf() {
    let dir = tmp_dir("stable");
    let nu = dir.join("nu.json");
    fs::write(&nu, r#"[{"weight":1.0,"direction":[1.0]}]"#).unwrap();
    let (ok, stdout, stderr) = run(&[
        "stable",
        "sample",
        "--alpha",
        "0.75",
        "--nu",
        nu.to_str().unwrap(),
        "--paths",
        "2",
        "--seed",
        "1",
        "--k-trunc",
        "200",
    ]);
    assert!(ok, "{stderr}");
    assert_eq!(stdout.lines().count(), 2);
    let grid = dir.join("grid.csv");
    fs::write(&grid, "0.5\n1.0\n").unwrap();
    let (ok, stdout, stderr) = run(&[
        "stable",
        "chf",
        "--alpha",
        "0.75",
        "--nu",
        nu.to_str().unwrap(),
        "--s-grid",
        grid.to_str().unwrap(),
    ]);
    assert!(ok, "{stderr}");
    assert_eq!(stdout.lines().next().unwrap(), "s,re,im");
    assert_eq!(stdout.lines().count(), 3);
}

#[test]
fn profile_cusp_reports_mode() {
    let dir = tmp_dir("cusp");
    let traces = dir.join("traces.csv");
    let mut csv = String::from("theta,vp,vm\n");
    for i in 0..=128 {
        let th = std::f64::consts::PI * i as f64 / 128.0;
        csv.push_str(&format!("{th},1.0,1.0\n"));
    }
    fs::write(&traces, csv).unwrap();
    let out = dir.join("profile.json");
    let (ok, stdout, stderr) = run(&[
        "profile-cusp",
        "--beta",
        "3.0",
        "--traces",
        traces.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--panels",
        "128",
    ]);
    assert!(ok, "{stderr}");
    assert!(stdout.starts_with("mode=M1"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["kind"], "polyline");
}

#[test]
fn experiment_run_and_report_are_deterministic() {
    let dir = tmp_dir("experiment");
    let cfg_path = dir.join("cfg.json");
    let res_path = dir.join("results.bin");
    let cfg = serde_json::json!({
        "experiment": "cli-smoke",
        "kind": "lapnumber",
        "map": "doubling",
        "alpha": 0.75,
        "ns": [2000],
        "samples": 1,
        "seeds": 3,
        "seed": 42,
        "output": res_path,
    });
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (ok, csv1, stderr) = run(&["experiment", "run", cfg_path.to_str().unwrap()]);
    assert!(ok, "{stderr}");
    assert!(csv1.starts_with("experiment,kind,n,seed,statistic,value,ci_lo,ci_hi,runtime_s"));
    let (ok, report, stderr) = run(&[
        "experiment",
        "report",
        res_path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(ok, "{stderr}");
    // statistical columns identical between a fresh run and the stored report
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').map(|(a, _)| a.to_string()).unwrap())
            .collect()
    };
    let (_, csv2, _) = run(&["experiment", "run", cfg_path.to_str().unwrap()]);
    assert_eq!(strip(&csv1), strip(&csv2));
    assert_eq!(strip(&csv1), strip(&report));
}

#[test]
fn bad_inputs_fail_with_nonzero_status() {
    let (ok, _, stderr) = run(&["experiment", "run", "/nonexistent/cfg.json"]);
    assert!(!ok);
    assert!(stderr.contains("error:"));
    let dir = tmp_dir("bad");
    let cfg_path = dir.join("cfg.json");
    fs::write(
        &cfg_path,
        r#"{"experiment":"x","kind":"lapnumber","alpha":0.75,"ns":[100],"seed":1}"#,
    )
    .unwrap();
    let (ok, _, stderr) = run(&["experiment", "run", cfg_path.to_str().unwrap()]);
    assert!(!ok);
    assert!(stderr.contains("map"), "stderr: {stderr}");
}

use std::process::Command;

use pfol_harness::output::{read_csv, read_json, CSV_HEADER};

fn pfol() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pfol"));
    cmd.env_remove("PFOL_THREADS").env("RUST_BACKTRACE", "0");
    cmd
}

fn stdout_of(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("UTF-8 output")
}

const SMALL: &[&str] = &[
    "--algo", "ofw", "--dim", "3", "--T", "64", "--T", "128", "--seed", "1", "--seed", "2",
];

#[test]
fn run_writes_the_exact_csv_header_and_one_row_per_cell() {
    let text = stdout_of(pfol().arg("run").args(SMALL));
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.algo == "ofw" && r.set == "ball" && r.lmo_calls == r.horizon));
}

#[test]
fn json_output_matches_csv_output() {
    let csv = stdout_of(pfol().arg("run").args(SMALL));
    let json = stdout_of(pfol().arg("run").args(SMALL).args(["--format", "json"]));
    assert_eq!(read_csv(csv.as_bytes()).unwrap(), read_json(json.as_bytes()).unwrap());
}

#[test]
fn output_is_independent_of_thread_count() {
    let serial = stdout_of(pfol().arg("run").args(SMALL).args(["--threads", "1"]));
    let parallel = stdout_of(pfol().arg("run").args(SMALL).args(["--threads", "4"]));
    let env_serial = stdout_of(
        pfol()
            .arg("run")
            .args(SMALL)
            .args(["--threads", "4"])
            .env("PFOL_THREADS", "1"),
    );
    assert_eq!(serial, parallel);
    assert_eq!(serial, env_serial);
}

#[test]
fn invalid_thread_variable_is_reported() {
    let out = pfol()
        .arg("run")
        .args(SMALL)
        .env("PFOL_THREADS", "many")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("PFOL_THREADS"));
}

#[test]
fn config_file_drives_a_sweep_and_writes_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        format!(
            "algo = \"ogd\"\nset = \"box\"\ndim = 4\nT = [256, 512, 1024, 2048]\nseeds = [1, 2]\noutput = {:?}\n\n\
             [adversary]\nkind = \"iid-random-center\"\nalpha = 2.0\n",
            out.display().to_string()
        ),
    )
    .unwrap();
    let res = pfol().args(["sweep", "--config"]).arg(&config).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("fitted regret exponent"));
    let rows = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows
        .iter()
        .all(|r| r.algo == "ogd" && r.set == "box" && r.projections == r.horizon));

    // Command-line flags override the file.
    let res = pfol()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--algo", "rftl", "--T", "100", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success());
    let rows = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.algo == "rftl" && r.horizon == 100));
}

#[test]
fn verify_reports_every_check_and_succeeds_on_clean_runs() {
    let res = pfol()
        .args([
            "verify",
            "--algo",
            "ofw-bandit",
            "--dim",
            "2",
            "--T",
            "1000",
            "--seed",
            "5",
            "--delta",
            "0.2",
        ])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = String::from_utf8_lossy(&res.stderr);
    for name in [
        "feasibility",
        "play-structure",
        "block-certificate",
        "inner-step-bound",
        "lmo-calls",
    ] {
        assert!(report.contains(&format!("PASS {name}")), "{report}");
    }
}

#[test]
fn oversized_delta_fails_before_running() {
    let res = pfol()
        .args(["run", "--algo", "ofw-bandit", "--T", "1000", "--delta", "1.5"])
        .output()
        .unwrap();
    assert!(!res.status.success());
    assert!(res.stdout.is_empty());
    assert!(String::from_utf8_lossy(&res.stderr).contains("c T^(-1/3) / r <= 1"));
}

#[test]
fn bounds_prints_resolved_parameters() {
    let text = stdout_of(pfol().args(["bounds", "--algo", "ofw-bandit", "--T", "8000", "--adversary", "iid"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let cell = &v[0];
    assert_eq!(cell["params"]["block"], 400);
    assert_eq!(cell["params"]["t0"], 1600.0);
    assert!(cell["bound_lmo"].as_f64().unwrap() > 0.0);
}

#[test]
fn timing_flag_fills_wall_time_only_on_request() {
    let rows = read_csv(stdout_of(pfol().arg("run").args(SMALL)).as_bytes()).unwrap();
    assert!(rows.iter().all(|r| r.wall_ms == 0));
    assert!(stdout_of(pfol().arg("run").args(SMALL).arg("--timing")).starts_with(CSV_HEADER));
}

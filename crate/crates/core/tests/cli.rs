use std::path::Path;
use std::process::{Command, Output};

fn wpmec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpmec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn zero_arrivals_give_zero_objective() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.toml", "arrivals = [0.0, 0.0, 0.0, 0.0]\n");
    let out = wpmec(&["solve", "--config", &cfg, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["objective"], 0.0);
    assert_eq!(summary["feasibility"]["passed"], true);
}

#[test]
fn default_config_is_echoed() {
    let out = wpmec(&["solve", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let c = &s["config"];
    assert_eq!(c["slot_len"], 0.1);
    assert_eq!(c["bandwidth"], 1e6);
    assert_eq!(c["noise_power"], 1e-9);
    assert_eq!(c["eh_efficiency"], 0.3);
    assert_eq!(c["cycles_per_bit"], 200.0);
    // serde_json's default parser is not round-trip exact; check the text.
    assert!(stdout(&out).contains("\"cap_coeff\": 1e-29,"));
    assert_eq!(c["num_antennas"], 4);
    assert_eq!(c["rician_factor"], 2.0);
    assert_eq!(c["pathloss_ref_db"], -37.0);
    assert_eq!(c["pathloss_exponent"], 3.0);
    assert_eq!(c["num_slots"], 50);
    assert_eq!(s["transitions"].as_array().unwrap().last().unwrap(), 50);
}

#[test]
fn trace_csv_has_fixed_columns() {
    let out = wpmec(&["solve", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "slot,arrival,wpt_gain,offl_gain,eff_gain,power,local_bits,offl_bits,local_energy,offl_energy,buffer,battery"
    );
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn time_varying_summary_lists_dominating_slots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tv.toml",
        "kind = \"time_varying\"\narrivals = [2e5, 2e5, 2e5, 2e5, 2e5]\n\
         wpt_gains = [1e-5, 3e-5, 2e-5, 5e-5, 4e-5]\noffl_gains = [6e-7, 6e-7, 6e-7, 6e-7, 6e-7]\n",
    );
    let out_dir = dir.path().join("run");
    let out = wpmec(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cds"], serde_json::json!([1, 2, 4]));
    assert!(out_dir.join("trace.csv").exists());
}

#[test]
fn verify_tiny_static_instance_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n2.toml", "num_slots = 2\n");
    let out = wpmec(&["verify", "--config", &cfg, "--seed", "5"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS oracle"), "{text}");
}

#[test]
fn verify_long_fading_instance_skips_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tv.toml", "kind = \"time_varying\"\n");
    let out = wpmec(&["verify", "--config", &cfg]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS cds_only_power"));
    assert!(text.contains("SKIP oracle"));
}

#[test]
fn corrupted_plan_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n4.toml", "num_slots = 4\n");
    let trace = stdout(&wpmec(&["solve", "--config", &cfg]));
    // Halve the power of every slot.
    let mut lines = trace.lines();
    let mut corrupted = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let mut cols: Vec<String> = line.split(',').map(str::to_owned).collect();
        let p: f64 = cols[5].parse().unwrap();
        cols[5] = (p / 2.0).to_string();
        corrupted.push_str(&cols.join(","));
        corrupted.push('\n');
    }
    let plan = write(dir.path(), "plan.csv", &corrupted);
    let out = wpmec(&["verify", "--config", &cfg, "--plan", &plan]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout(&out);
    assert!(text.contains("FAIL feasibility: energy_causality at slot"), "{text}");
}

#[test]
fn sweep_writes_tidy_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = wpmec(&[
        "sweep",
        "--axis",
        "distance",
        "--values",
        "2,4",
        "--scheme",
        "offline,local_only",
        "--reps",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis_value,scheme,mean_energy_per_slot,stderr,reps");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("2.0,offline,"));
    assert!(lines[4].starts_with("4.0,local_only,") && lines[4].ends_with(",10"));
}

#[test]
fn sweep_json_format() {
    let out = wpmec(&[
        "sweep", "--axis", "a-max", "--values", "1e5", "--scheme", "myopic", "--reps", "3", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows[0]["scheme"], "myopic");
    assert_eq!(rows[0]["reps"], 3);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "slot_len = \"long\"\n");
    assert_eq!(wpmec(&["solve", "--config", &bad]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.toml", "antennas = 4\n");
    assert_eq!(wpmec(&["solve", "--config", &unknown]).status.code(), Some(2));
    let domain = write(dir.path(), "domain.toml", "user_distance = 12.0\n");
    assert_eq!(wpmec(&["solve", "--config", &domain]).status.code(), Some(2));
    assert_eq!(
        wpmec(&["solve", "--config", "/nonexistent.toml"]).status.code(),
        Some(2)
    );
    let empty = wpmec(&["sweep", "--axis", "n", "--values", "10", "--scheme", ""]);
    assert_eq!(empty.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("empty scheme list"));
}

#[test]
fn same_seed_same_bytes() {
    let a = wpmec(&["sweep", "--axis", "n", "--values", "5,8", "--reps", "15", "--seed", "3"]);
    let b = wpmec(&["sweep", "--axis", "n", "--values", "5,8", "--reps", "15", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let c = wpmec(&["sweep", "--axis", "n", "--values", "5,8", "--reps", "15", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

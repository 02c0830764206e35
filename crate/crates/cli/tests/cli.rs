use std::path::Path;
use std::process::Command;

use tempfile::tempdir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_floquet-eikonal"));
    cmd.args(args).env_remove("FLOQUET_EA_PROFILE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

/// Header and data rows after the `#` metadata.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().expect("header").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn free_potential_sigma_is_zero_for_both_methods() {
    let r = run(&["sigma", "--U0", "0", "--U1", "0", "--omega", "1", "--k", "37", "--method", "both"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = table(&r.stdout);
    let s = column(&h, "sigma_tot");
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(num(&row[s]), 0.0);
    }
}

#[test]
fn drive_only_point_agrees_between_methods() {
    let r = run(&["sigma", "--U0", "100", "--U1", "0", "--omega", "10", "--k", "37", "--method", "both"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = table(&r.stdout);
    let s = column(&h, "sigma_tot");
    let m = column(&h, "method");
    assert_eq!((rows[0][m].as_str(), rows[1][m].as_str()), ("ea", "exact"));
    let (ea, exact) = (num(&rows[0][s]), num(&rows[1][s]));
    assert!(exact > 0.0 && rel(ea, exact) < 0.05, "{ea} {exact}");
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "U0 = [1, \n").unwrap();
    let out = dir.path().join("out.csv");
    let r = run(&["sigma", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("malformed config"));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "U0 = 1.0\nfrequency = 3.0\n").unwrap();
    assert_eq!(run(&["sigma", "--config", cfg.to_str().unwrap()]).code, 2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "U0 = 0\nU1 = 4\nomega = 2\nk = 9\nmethod = \"ea\"\n").unwrap();
    let r = run(&["sigma", "--config", cfg.to_str().unwrap(), "--k", "11"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("# k = 11.0\n"));
    assert!(r.stdout.contains("# omega = 2.0\n"));
    assert!(r.stdout.contains("# U1 = 4.0\n"));
    assert_eq!(table(&r.stdout).1.len(), 1);
}

#[test]
fn identical_config_gives_identical_csv() {
    let args = [
        "sweep",
        "--U1",
        "20",
        "--omega",
        "2",
        "--sweep-axis",
        "k",
        "--sweep-start",
        "30",
        "--sweep-stop",
        "10",
        "--sweep-steps",
        "3",
    ];
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# generated_unix")).collect::<Vec<_>>().join("\n");
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
    let (h, rows) = table(&a.stdout);
    assert_eq!(h, ["param", "value", "sigma_ea", "sigma_exact", "rel_diff", "ea_valid_flag"]);
    let v: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    assert_eq!(v, [10.0, 20.0, 30.0]);
}

#[test]
fn zero_length_sweep_exits_2() {
    let r = run(&["sweep", "--sweep-axis", "U0", "--sweep-start", "5", "--sweep-stop", "5"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
}

#[test]
fn failed_rows_carry_nan_and_exit_4() {
    // k = 0 is not a scattering state
    let r = run(&[
        "sweep",
        "--U0",
        "5",
        "--sweep-axis",
        "k",
        "--sweep-start",
        "0",
        "--sweep-stop",
        "10",
        "--sweep-steps",
        "3",
    ]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    let (h, rows) = table(&r.stdout);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][column(&h, "sigma_ea")], "NaN");
    assert_eq!(rows[0][column(&h, "sigma_exact")], "NaN");
    assert!(num(&rows[1][column(&h, "sigma_exact")]) > 0.0);
    assert!(r.stdout.contains("# failed_rows = 1"));
}

#[test]
fn tied_static_depth_follows_drive() {
    let r = run(&["sweep", "--preset", "fig-c", "--sweep-stop", "2", "--sweep-steps", "2", "--method", "ea"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let last = table(&r.stdout).1.pop().unwrap();
    let direct = run(&["sigma", "--U0", "2", "--U1", "20", "--omega", "1", "--k", "37", "--method", "ea"]);
    let (h, rows) = table(&direct.stdout);
    assert_eq!(last[2], rows[0][column(&h, "sigma_tot")]);
}

#[test]
fn free_potential_amplitudes_vanish() {
    let r = run(&["amplitude", "--U0", "0", "--U1", "0", "--k", "37", "--method", "both"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = table(&r.stdout);
    assert!(!rows.is_empty());
    for row in rows {
        for c in ["re_f_ea", "im_f_ea", "re_f_exact", "im_f_exact"] {
            assert_eq!(num(&row[column(&h, c)]), 0.0);
        }
    }
}

#[test]
fn static_amplitudes_agree_at_small_angles() {
    let r = run(&["amplitude", "--U0", "0", "--U1", "10", "--k", "37", "--method", "both", "--theta-stop", "0.05"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = table(&r.stdout);
    let d = column(&h, "rel_diff");
    for row in rows {
        assert!(num(&row[d]) < 0.02, "{row:?}");
    }
}

#[test]
fn single_method_amplitude_columns() {
    let r = run(&[
        "amplitude",
        "--U0",
        "2",
        "--U1",
        "1",
        "--omega",
        "3",
        "--k",
        "20",
        "--n",
        "1",
        "--method",
        "ea",
        "--theta-steps",
        "2",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = table(&r.stdout);
    assert_eq!(h, ["n", "theta", "re_f", "im_f"]);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[0] == "1"));
}

#[test]
fn closed_channel_amplitude_exits_2() {
    // E = 1 < ħω = 2
    let r = run(&["amplitude", "--U0", "3", "--U1", "1", "--omega", "2", "--k", "1", "--n=-1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("closed"));
}

#[test]
fn large_angle_eikonal_needs_force() {
    let args = [
        "amplitude",
        "--U1",
        "5",
        "--k",
        "37",
        "--method",
        "ea",
        "--theta-start",
        "0.5",
        "--theta-stop",
        "0.6",
        "--theta-steps",
        "2",
    ];
    let r = run(&args);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(run(&forced).code, 0);
}

#[test]
fn quick_validation_passes() {
    let r = run(&["validate", "--quick"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("checks passed"));
}

#[test]
fn impossible_tolerance_fails_validation() {
    let r = run(&["validate", "--quick", "--check-tol", "1e-15"]);
    assert_eq!(r.code, 5);
    assert!(r.stderr.contains("[FAIL]"));
}

#[test]
fn profile_comes_from_environment() {
    let r = run_env(&["sigma", "--U1", "3", "--method", "ea"], &[("FLOQUET_EA_PROFILE", "strict")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("# profile = \"strict\""));
    let explicit =
        run_env(&["sigma", "--U1", "3", "--method", "ea", "--profile", "fast"], &[("FLOQUET_EA_PROFILE", "strict")]);
    assert!(explicit.stdout.contains("# profile = \"fast\""));
    assert_eq!(run_env(&["sigma"], &[("FLOQUET_EA_PROFILE", "loose")]).code, 2);
}

#[test]
fn companion_files_are_written() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let r = run(&[
        "sweep",
        "--U1",
        "3",
        "--method",
        "ea",
        "--sweep-axis",
        "U0",
        "--sweep-start",
        "0",
        "--sweep-stop",
        "4",
        "--sweep-steps",
        "3",
        "--json-mirror",
        "--gnuplot",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# floquet-eikonal"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&format!("{}.json", out.display()))).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
    assert_eq!(json["config"]["U1"], 3.0);
    assert!(json["rows"][0]["sigma_exact"].is_null());
    let gp = std::fs::read_to_string(format!("{}.gp", out.display())).unwrap();
    assert!(gp.contains("plot 's.csv' using 2:3"));
}

#[test]
fn json_output_format() {
    let r = run(&["sigma", "--U1", "2", "--method", "exact", "--format", "json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["rows"][0]["method"], "exact");
    assert!(v["details"]["results"][0]["per_channel"].is_object());
}

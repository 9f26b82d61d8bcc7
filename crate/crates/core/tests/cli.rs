use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn hbtms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbtms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SHORT: &str = r#"
[battery]
internal_resistance = 0.084

[discharge]
duration = 60.0

[coolant]
catalog = "Nf(Al)"

[pcm]
latent_heat = 160000.0
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn zero_duration_run_writes_a_header_only_series() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &SHORT.replace("60.0", "0.0"));
    let out = dir.path().join("out");
    let o = hbtms(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(series, "t,T_max,T_avg,xi_mean,mass_flow,dp,pump_power_W\n");
    for f in ["audit.txt", "kpi.csv", "effective_config.toml", "nodes.csv", "edges.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn missing_coolant_exits_with_a_config_error() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &SHORT.replace("catalog = \"Nf(Al)\"", ""));
    let o = hbtms(&["run", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("coolant"));
    let o = hbtms(&["run", "--preset", "no-such-preset"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn stalled_phase_change_exits_3_and_keeps_partial_output() {
    let dir = tempdir().unwrap();
    let text = SHORT.replace("60.0", "900.0") + "\n[solver]\nmax_phase_iterations = 1\n";
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = hbtms(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(out.join("FAILED")).unwrap().contains("phase"));
    let rows = fs::read_to_string(out.join("series.csv")).unwrap().lines().count();
    assert!(rows > 1);
}

#[test]
fn direction_preset_sweeps_six_rows() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hbtms(&[
        "sweep",
        "--preset",
        "paper-3.2-directions",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "3",
        "--dt-override",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let kpi = fs::read_to_string(out.join("kpi.csv")).unwrap();
    assert_eq!(kpi.lines().count(), 7);
    assert!(kpi.starts_with("direction,"));
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("direction"));
    assert_eq!(fs::read_dir(out.join("cases")).unwrap().count(), 6);
    let effective = fs::read_to_string(out.join("effective_config.toml")).unwrap();
    assert!(effective.lines().any(|l| l == "dt = 5.0"));
}

#[test]
fn reruns_and_reparsed_effective_configs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let run = |cfg: &str, name: &str| {
        let out = dir.path().join(name);
        let o = hbtms(&["run", "--config", cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        out
    };
    let a = run(&cfg, "a");
    let b = run(&cfg, "b");
    let effective = a.join("effective_config.toml");
    let c = run(effective.to_str().unwrap(), "c");
    for f in ["series.csv", "kpi.csv", "audit.txt", "nodes.csv", "edges.csv"] {
        let first = fs::read(a.join(f)).unwrap();
        assert_eq!(first, fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(first, fs::read(c.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn convergence_writes_one_row_per_step() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("out");
    let o = hbtms(&["convergence", "--config", &cfg, "--out", out.to_str().unwrap(), "--dts", "4,2,1"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn validate_props_reports_each_check() {
    let o = hbtms(&["validate-props"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("Kerosene"));
    assert!(stdout.contains("PASS Nf(Al) density"));
    // the catalog Nf(Al) conductivity is above what the Maxwell model can reach
    assert!(stdout.contains("FAIL Nf(Al) conductivity"));
    assert_eq!(code(&o), 1);
}

use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_v2g-sim"));
    cmd.args(args).env_remove("V2G_SIM_OUT");
    if let Some(dir) = out_env {
        cmd.env("V2G_SIM_OUT", dir);
    }
    cmd.output().unwrap()
}

#[test]
fn run_writes_its_trace_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sim(
        &["run", "--scenario", "acm-start", "--case", "ev100", "--duration", "120", "--set", "scenario.acm_start_s=60", "--out", out],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("trace_acm-start_ev100.csv")).unwrap();
    assert_eq!(text.lines().count(), 122);
    assert!(dir.path().join("plot_frequency.py").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("max_abs_dev_hz"));
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = sim(&["run", "--duration", "10", "--set", "run.case=v2g-off", "--set", "scenario.contingency_enabled=false"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("trace_pv-drop_v2g-off.csv").exists());
}

#[test]
fn dedicated_flags_override_set_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sim(
        &["run", "--set", "sim.duration_s=5", "--duration", "20", "--case", "v2g-off", "--set", "scenario.contingency_enabled=false", "--out", out],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("trace_pv-drop_v2g-off.csv")).unwrap();
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn bad_configuration_exits_two() {
    let o = sim(&["run", "--set", "controller.kq=1"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("controller.kq"));
    let o = sim(&["run", "--scenario", "meteor"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = sim(&["run", "--dt", "-0.01"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("sub");
    let o = sim(&["run", "--duration", "5", "--case", "v2g-off", "--set", "scenario.contingency_enabled=false", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn short_batch_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sim(
        &["batch", "--duration", "30", "--set", "scenario.contingency_enabled=false", "--out", out],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.len(), 12, "{names:?}");
    assert!(names.iter().any(|n| n == "summary.json") && names.iter().any(|n| n == "summary.txt"));
}

#[test]
fn oracle_checks_all_pass() {
    let o = sim(&["oracle"], None);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().count() >= 5 && stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

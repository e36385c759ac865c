use std::path::PathBuf;

use v2g_microgrid::control::Mode;
use v2g_microgrid::io::{
    emit_plot_script, read_summary_json, read_trace_csv, render_summary_table, trace_file_name, trace_to_csv,
    write_batch, write_summary, write_trace_csv, TRACE_HEADER,
};
use v2g_microgrid::scenario::{run_batch, BatchTable, ModeDuty, RunSummary, SummaryCell};
use v2g_microgrid::sim::{Sample, SimTrace};
use v2g_microgrid::{parse_config, CaseId, ConfigError, RunConfig, ScenarioId};

fn sample(k: usize) -> Sample {
    let x = k as f64;
    Sample {
        t_s: x,
        delta_f_hz: -0.123456789012 * (x / 7.0).sin(),
        p_diesel_mw: 3.5 + x * 1e-3,
        p_pv_mw: 7.25,
        p_wind_mw: 1.0 / 3.0,
        p_load_mw: 10.0,
        p_ev_mw: -0.5 * (x / 11.0).cos(),
        mean_soc: if k.is_multiple_of(2) { 0.5 } else { f64::NAN },
        mode: [Mode::Charging, Mode::Regulation, Mode::Idle][k % 3],
        wind_speed_m_s: 10.0,
        wind_online: true,
        soc_min: 0.3,
        soc_max: 0.7,
    }
}

fn trace(n: usize) -> SimTrace {
    SimTrace {
        f_nom_hz: 50.0,
        samples: (0..n).map(sample).collect(),
    }
}

fn summary(dev: f64) -> RunSummary {
    RunSummary {
        f_min_hz: 50.0 - dev,
        f_max_hz: 50.0 + dev / 2.0,
        max_abs_dev_hz: dev,
        time_of_nadir_s: 43_201.0,
        mode_duty: ModeDuty {
            charging: 0.25,
            regulation: 0.05,
            idle: 0.7,
        },
        final_mean_soc: Some(0.51),
    }
}

fn table(failed: Option<(ScenarioId, CaseId)>) -> BatchTable {
    let cells = ScenarioId::ALL
        .iter()
        .flat_map(|&s| CaseId::ALL.iter().map(move |&c| (s, c)))
        .enumerate()
        .map(|(k, (scenario, case))| {
            let fail = failed == Some((scenario, case));
            SummaryCell {
                scenario,
                case,
                summary: (!fail).then(|| summary(0.6 - 0.05 * k as f64)),
                error: fail.then(|| "non-finite value in swing".to_string()),
            }
        })
        .collect();
    BatchTable { f_nom_hz: 50.0, cells }
}

#[test]
fn trace_file_has_header_plus_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_trace_csv(&trace(61), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 62);
    assert_eq!(text.lines().next().unwrap(), TRACE_HEADER);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
}

#[test]
fn empty_trace_writes_only_the_header() {
    assert_eq!(trace_to_csv(&trace(0)), format!("{TRACE_HEADER}\n"));
}

#[test]
fn frequency_column_carries_nine_significant_digits() {
    let text = trace_to_csv(&trace(5));
    let f = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let digits = f.chars().filter(char::is_ascii_digit).count();
    assert!(digits >= 9, "{f}");
}

#[test]
fn trace_round_trips_at_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let original = trace(200);
    write_trace_csv(&original, &path).unwrap();
    let parsed = read_trace_csv(&path, 50.0).unwrap();
    assert_eq!(parsed.len(), original.len());
    assert_eq!(trace_to_csv(&parsed), trace_to_csv(&original));
    for (a, b) in parsed.samples.iter().zip(&original.samples) {
        assert!((a.f_hz(50.0) - b.f_hz(50.0)).abs() <= 5e-10);
        assert!((a.p_ev_mw - b.p_ev_mw).abs() <= 5e-10);
        assert_eq!(a.mode, b.mode);
        assert_eq!(a.mean_soc.is_nan(), b.mean_soc.is_nan());
    }
}

#[test]
fn unwritable_trace_path_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let err = write_trace_csv(&trace(3), &blocker.join("t.csv")).unwrap_err();
    assert!(err.to_string().contains("file"), "{err}");
}

#[test]
fn summary_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let t = table(None);
    let (json, txt) = write_summary(&t, dir.path()).unwrap();
    assert_eq!(read_summary_json(&json).unwrap(), t);
    let text = std::fs::read_to_string(txt).unwrap();
    assert_eq!(text, render_summary_table(&t));
    for scenario in ScenarioId::ALL {
        assert!(text.contains(scenario.title()));
    }
    assert!(text.contains("Frequency Min (Hz)") && text.contains("Frequency Max (Hz)"));
    assert!(text.contains("V2G Off") && text.contains("100 EVs") && text.contains("200 EVs"));
}

#[test]
fn failed_cell_shows_error_and_keeps_the_rest() {
    let t = table(Some((ScenarioId::WindTrip, CaseId::Ev100)));
    let text = render_summary_table(&t);
    let block: Vec<&str> = text.split("\n\n").collect();
    assert!(block[1].contains("ERROR"));
    assert!(!block[0].contains("ERROR") && !block[2].contains("ERROR"));
    assert_eq!(block[1].matches("ERROR").count(), 3);
    assert!(text.contains("non-finite value in swing"));
}

#[test]
fn plot_script_references_traces_relatively_and_notes_missing_ones() {
    let dir = tempfile::tempdir().unwrap();
    let present = dir.path().join(trace_file_name(ScenarioId::PvDrop, CaseId::V2gOff));
    write_trace_csv(&trace(10), &present).unwrap();
    let missing = dir.path().join(trace_file_name(ScenarioId::PvDrop, CaseId::Ev100));
    let out = dir.path().join("plot.py");
    emit_plot_script(
        &[(ScenarioId::PvDrop, CaseId::V2gOff, present), (ScenarioId::PvDrop, CaseId::Ev100, missing)],
        &out,
    )
    .unwrap();
    let script = std::fs::read_to_string(out).unwrap();
    assert!(script.contains("\"trace_pv-drop_v2g-off.csv\""));
    let code: Vec<&str> = script.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
    let abs = dir.path().display().to_string();
    assert!(code.iter().all(|l| !l.contains(&abs) && !l.contains("trace_pv-drop_ev100")));
    let comment = script.lines().find(|l| l.starts_with('#') && l.contains("trace_pv-drop_ev100.csv"));
    assert!(comment.is_some(), "{script}");
}

#[test]
fn plot_script_needs_at_least_one_trace() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_plot_script(&[], &dir.path().join("plot.py")).is_err());
}

#[test]
fn repeated_batches_write_identical_bytes() {
    let mut cfg = RunConfig::default();
    cfg.sim.duration_s = 120.0;
    cfg.scenario.contingency_enabled = false;
    let write = || {
        let dir = tempfile::tempdir().unwrap();
        let (runs, table) = run_batch::<f64>(&cfg);
        let files = write_batch(&runs, &table, dir.path()).unwrap();
        let mut all: Vec<PathBuf> = files.traces.clone();
        all.extend([files.summary_json, files.summary_txt, files.plot_script]);
        let bytes: Vec<Vec<u8>> = all.iter().map(|p| std::fs::read(p).unwrap()).collect();
        (all.len(), bytes)
    };
    let (n, a) = write();
    let (_, b) = write();
    assert_eq!(n, 12);
    assert_eq!(a, b);
}

#[test]
fn config_errors_name_the_key() {
    let flag = |k: &str, v: &str| vec![(k.to_string(), v.to_string())];
    match parse_config(None, &flag("controller.dead_band_pu", "-1")) {
        Err(e @ ConfigError::OutOfRange { .. }) => assert!(e.to_string().contains("controller.dead_band_pu")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_config(None, &flag("controller.kq", "1")), Err(ConfigError::UnknownKey(_))));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "# comment\ncontroller.kp = 2\nfleet.count = 150\n").unwrap();
    let cfg = parse_config(Some(&file), &flag("controller.kp", "3")).unwrap();
    assert_eq!((cfg.controller.kp, cfg.fleet.count), (3.0, Some(150)));
    assert_eq!(cfg, parse_config(Some(&file), &flag("controller.kp", "3")).unwrap());
    std::fs::write(&file, "controller.kp 2\n").unwrap();
    assert!(matches!(parse_config(Some(&file), &[]), Err(ConfigError::Malformed { line: 1, .. })));
}

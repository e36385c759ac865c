use v2g_microgrid::fleet::ALLOCATION_TOLERANCE_MW;
use v2g_microgrid::io::trace_to_csv;
use v2g_microgrid::scenario::{build_simulator, run_batch};
use v2g_microgrid::sim::SimTrace;
use v2g_microgrid::{build_scenario, run_scenario, summarize, swing_step, CaseId, RunConfig, ScenarioId};

fn config(duration_s: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.sim.duration_s = duration_s;
    cfg
}

fn trace(cfg: &RunConfig, scenario: ScenarioId, case: CaseId) -> SimTrace {
    let spec = build_scenario(scenario, case, &cfg.scenario);
    let out = run_scenario::<f64>(cfg, &spec).unwrap();
    assert!(out.fault.is_none(), "{:?}", out.fault);
    out.trace
}

#[test]
fn trace_has_one_sample_per_second_including_both_ends() {
    let mut cfg = config(600.0);
    cfg.scenario.contingency_enabled = false;
    let t = trace(&cfg, ScenarioId::PvDrop, CaseId::Ev100);
    assert_eq!(t.len(), 601);
    for (k, s) in t.samples.iter().enumerate() {
        assert!((s.t_s - k as f64).abs() < 1e-9);
    }
}

#[test]
fn disabled_contingencies_share_one_baseline() {
    let mut cfg = config(600.0);
    cfg.scenario.contingency_enabled = false;
    let base = trace(&cfg, ScenarioId::PvDrop, CaseId::Ev100);
    for scenario in [ScenarioId::WindTrip, ScenarioId::AcmStart] {
        let other = trace(&cfg, scenario, CaseId::Ev100);
        for (a, b) in base.samples.iter().zip(&other.samples) {
            assert!((a.delta_f_hz - b.delta_f_hz).abs() <= 1e-9);
        }
        assert_eq!(base, other);
    }
}

#[test]
fn samples_before_an_event_match_the_baseline() {
    let mut cfg = config(600.0);
    cfg.scenario.acm_start_s = 300.0;
    let with_event = trace(&cfg, ScenarioId::AcmStart, CaseId::Ev200);
    cfg.scenario.contingency_enabled = false;
    let baseline = trace(&cfg, ScenarioId::AcmStart, CaseId::Ev200);
    assert_eq!(with_event.samples[..300], baseline.samples[..300]);
    assert!(with_event.samples[300].p_load_mw > baseline.samples[300].p_load_mw + 10.0);
}

#[test]
fn pv_derate_applies_and_lifts_at_its_timestamps() {
    let cfg = config(43_600.0);
    let t = trace(&cfg, ScenarioId::PvDrop, CaseId::V2gOff);
    let pv = |k: usize| t.samples[k].p_pv_mw;
    assert!(pv(43_199) > 7.0);
    assert!((pv(43_200) / pv(43_199) - 0.2).abs() < 1e-3);
    assert!((pv(43_499) / pv(43_200) - 1.0).abs() < 1e-3);
    assert!((pv(43_500) / pv(43_499) - 5.0).abs() < 5e-3);
}

#[test]
fn machine_starts_at_its_timestamp() {
    let cfg = config(43_300.0);
    let t = trace(&cfg, ScenarioId::AcmStart, CaseId::V2gOff);
    let step = t.samples[43_200].p_load_mw - t.samples[43_199].p_load_mw;
    assert!((step - 2.0 * 0.9 * 7.0).abs() < 1e-9, "{step}");
    assert!(t.samples[43_199].delta_f_hz.abs() < 0.05);
    assert!(t.samples[43_201].delta_f_hz < -0.5);
}

#[test]
fn gust_overrides_the_wind_profile_for_its_duration() {
    let cfg = config(80_000.0);
    let t = trace(&cfg, ScenarioId::WindTrip, CaseId::V2gOff);
    assert!(t.samples[79_199].wind_speed_m_s <= 13.5);
    assert_eq!(t.samples[79_200].wind_speed_m_s, 16.0);
    assert_eq!(t.samples[79_799].wind_speed_m_s, 16.0);
    assert!(t.samples[79_800].wind_speed_m_s <= 13.5);
    assert!(t.samples[79_199].wind_online);
    assert!(!t.samples[79_200].wind_online);
    assert!(t.samples[79_800].wind_online);
    assert_eq!(t.samples[79_500].p_wind_mw, 0.0);
}

#[test]
fn every_step_applies_the_swing_update_of_its_imbalance() {
    let mut cfg = config(2_000.0);
    cfg.scenario.acm_start_s = 1_000.0;
    let spec = build_scenario(ScenarioId::AcmStart, CaseId::Ev200, &cfg.scenario);
    let mut sim = build_simulator::<f64>(&cfg, &spec).unwrap();
    let mut regulated = false;
    while !sim.finished() {
        let before = *sim.state();
        sim.step().unwrap();
        let rec = sim.last_step().unwrap();
        assert_eq!(rec.p_imbalance_mw, before.imbalance_mw());
        assert_eq!(rec.delta_f_before_hz, before.delta_f_hz);
        let expected = swing_step(before.delta_f_hz, before.imbalance_mw(), sim.config()).unwrap();
        assert_eq!(sim.state().delta_f_hz, expected);
        let fleet = &sim.plant().fleet;
        let allocated_mw: f64 = fleet.unit_power_kw.iter().sum::<f64>() * 1e-3;
        assert!((allocated_mw - fleet.p_resp_mw).abs() < ALLOCATION_TOLERANCE_MW);
        assert!(fleet.units.iter().all(|u| (0.2..=0.8).contains(&u.soc)));
        regulated |= fleet.p_resp_mw < -1e-3;
    }
    assert!(regulated, "the machine start should draw a discharge response");
}

#[test]
fn single_precision_runs_the_same_model() {
    let mut cfg = config(1_200.0);
    cfg.scenario.acm_start_s = 600.0;
    let spec = build_scenario(ScenarioId::AcmStart, CaseId::Ev100, &cfg.scenario);
    let wide = run_scenario::<f64>(&cfg, &spec).unwrap().trace;
    let narrow = run_scenario::<f32>(&cfg, &spec).unwrap();
    assert!(narrow.fault.is_none(), "{:?}", narrow.fault);
    let narrow = narrow.trace;
    let a = summarize(&wide, 50.0).unwrap();
    let b = summarize(&narrow, 50.0).unwrap();
    assert!((a.f_min_hz - b.f_min_hz).abs() < 1e-3, "{} vs {}", a.f_min_hz, b.f_min_hz);
}

#[test]
fn fractional_orders_give_a_finite_response() {
    let mut cfg = config(1_200.0);
    cfg.scenario.acm_start_s = 600.0;
    cfg.controller.lambda = 0.9;
    cfg.controller.mu = 0.8;
    let t = trace(&cfg, ScenarioId::AcmStart, CaseId::Ev100);
    assert!(t.samples.iter().all(|s| s.delta_f_hz.is_finite() && s.p_ev_mw.is_finite()));
}

#[test]
fn short_batch_is_deterministic_and_ordered() {
    let mut cfg = config(300.0);
    cfg.scenario.contingency_enabled = false;
    let (runs_a, table_a) = run_batch::<f64>(&cfg);
    let (runs_b, table_b) = run_batch::<f64>(&cfg);
    assert_eq!(table_a, table_b);
    let order: Vec<_> = runs_a.iter().map(|r| (r.scenario, r.case)).collect();
    let expected: Vec<_> = ScenarioId::ALL
        .iter()
        .flat_map(|&s| CaseId::ALL.iter().map(move |&c| (s, c)))
        .collect();
    assert_eq!(order, expected);
    for (a, b) in runs_a.iter().zip(&runs_b) {
        assert_eq!(trace_to_csv(a.trace.as_ref().unwrap()), trace_to_csv(b.trace.as_ref().unwrap()));
    }
}

#[test]
fn quiet_day_keeps_every_cell_near_nominal() {
    let mut cfg = config(7_200.0);
    cfg.scenario.contingency_enabled = false;
    let (_, table) = run_batch::<f64>(&cfg);
    for cell in &table.cells {
        let dev = cell.summary.as_ref().unwrap().max_abs_dev_hz;
        assert!(dev < 1e-3, "{} / {}: {dev}", cell.scenario, cell.case);
    }
}

#[test]
fn a_failing_cell_leaves_its_siblings_intact() {
    let mut cfg = config(60.0);
    cfg.scenario.contingency_enabled = false;
    cfg.fleet.roster_file = Some("/nonexistent/roster.csv".into());
    let (runs, table) = run_batch::<f64>(&cfg);
    for (run, cell) in runs.iter().zip(&table.cells) {
        if run.case == CaseId::V2gOff {
            assert!(run.error.is_none() && cell.summary.is_some());
        } else {
            assert!(run.error.is_some() && cell.summary.is_none() && cell.error.is_some());
        }
    }
}

use proptest::prelude::*;

use v2g_microgrid::control::{
    apply_limiters, controller_step, dead_band_filter, fopid_output, gl_weights, select_mode, ControllerInput,
    ControllerState, FopidParams, Mode,
};
use v2g_microgrid::control::pfc::controller_step_with;
use v2g_microgrid::fleet::{
    aggregate_response_step, allocate_and_update_soc, build_fleet, dispatchable_limits, EvUnit, FleetLimits,
    FleetParams, FleetState,
};
use v2g_microgrid::oracle::{bisection_cell_current, IntegerPid};
use v2g_microgrid::profile::Profile;
use v2g_microgrid::sim::{swing_step, Sample, SimConfig, SimTrace};
use v2g_microgrid::sources::solar::current_residual;
use v2g_microgrid::sources::{solar_cell_current, wind_power, wind_trip_update, SolarCellParams, WindFarm};
use v2g_microgrid::{summarize, RunConfig};

fn params() -> FopidParams<f64> {
    FopidParams::default()
}

fn limits(max_charge_mw: f64, max_discharge_mw: f64) -> FleetLimits<f64> {
    FleetLimits {
        max_charge_mw,
        max_discharge_mw,
    }
}

fn unit(soc: f64, plugged: bool) -> EvUnit<f64> {
    EvUnit {
        profile_id: 1,
        soc,
        capacity_kwh: 40.0,
        p_charger_kw: 10.0,
        plug_schedule: if plugged { vec![(0.0, 86_400.0)] } else { vec![] },
    }
}

fn sample(t_s: f64, delta_f_hz: f64) -> Sample {
    Sample {
        t_s,
        delta_f_hz,
        p_diesel_mw: 0.0,
        p_pv_mw: 0.0,
        p_wind_mw: 0.0,
        p_load_mw: 0.0,
        p_ev_mw: 0.0,
        mean_soc: f64::NAN,
        mode: Mode::Idle,
        wind_speed_m_s: 0.0,
        wind_online: true,
        soc_min: f64::NAN,
        soc_max: f64::NAN,
    }
}

proptest! {
    #[test]
    fn dead_band_is_idempotent(df in -5.0f64..5.0, band in 0.0f64..0.01) {
        let once = dead_band_filter(df, 50.0, band);
        prop_assert_eq!(dead_band_filter(once, 50.0, band), once);
    }

    #[test]
    fn limiter_output_respects_both_limits(
        raw in -20.0f64..20.0,
        last in -5.0f64..5.0,
        chg in 0.0f64..5.0,
        dis in 0.0f64..5.0,
        rate in 0.1f64..10.0,
        dt in 0.001f64..1.0,
    ) {
        let last = last.clamp(-dis, chg);
        let out = apply_limiters(raw, last, limits(chg, dis), rate, dt);
        prop_assert!(out <= chg && out >= -dis);
        prop_assert!((out - last).abs() <= rate * dt * (1.0 + 1e-12));
    }

    #[test]
    fn fopid_is_linear_in_the_error_history(
        errors in prop::collection::vec(-1.0f64..1.0, 1..200),
        c in -10.0f64..10.0,
        lambda in 0.1f64..1.9,
        mu in 0.1f64..1.9,
    ) {
        let p = FopidParams { lambda, mu, memory_len: 64, ..params() };
        let mut a = ControllerState::new(&p, 0.01);
        let mut b = ControllerState::new(&p, 0.01);
        for e in errors {
            let ua = fopid_output(&mut a, e, &p);
            let ub = fopid_output(&mut b, c * e, &p);
            prop_assert!((ub - c * ua).abs() <= 1e-9 * (1.0 + ub.abs()));
        }
    }

    #[test]
    fn mode_is_total_and_deterministic(p_t in -10.0f64..10.0, u in -10.0f64..10.0, se in 0.0f64..100.0) {
        let p = params();
        let m = select_mode(p_t, u, se, &p, 0.01);
        prop_assert_eq!(m, select_mode(p_t, u, se, &p, 0.01));
        let expected = if p_t < -p.balance_band_mw && u.abs() > 0.5 && se > 0.0 {
            Mode::Regulation
        } else if p_t > p.balance_band_mw {
            Mode::Charging
        } else {
            Mode::Idle
        };
        prop_assert_eq!(m, expected);
    }

    #[test]
    fn unit_orders_reduce_the_pipeline_to_pid(
        dfs in prop::collection::vec(-0.6f64..0.6, 1..400),
        p_ts in prop::collection::vec(-3.0f64..3.0, 1..400),
        se in 0.0f64..100.0,
    ) {
        let p = params();
        let dt = 0.01;
        let mut fopid = ControllerState::new(&p, dt);
        let mut core = ControllerState::new(&p, dt);
        let mut pid = IntegerPid::new(p.kp, p.ki, p.kd, dt, p.memory_len);
        for (k, &df) in dfs.iter().enumerate() {
            let input = ControllerInput {
                delta_f_hz: df,
                f_nom_hz: 50.0,
                p_t_mw: p_ts[k % p_ts.len()],
                se_percent: se,
                limits: limits(4.0, 4.0),
            };
            let a = controller_step(&mut fopid, &input, &p, dt);
            let b = controller_step_with(&mut core, &input, &p, dt, |_, e| pid.step(e));
            prop_assert!((a - b).abs() < 1e-9, "step {}: {} vs {}", k, a, b);
        }
    }

    #[test]
    fn half_order_partial_sums_shrink(len in 2usize..3000) {
        let w = gl_weights(0.5f64, len);
        let short: f64 = w[..len - 1].iter().sum();
        let long: f64 = w.iter().sum();
        prop_assert!(long.abs() < short.abs());
    }

    #[test]
    fn newton_current_solves_the_cell_equation(
        i_l in 0.5f64..10.0,
        log_io in -12.0f64..-6.0,
        xi in 1.0f64..2.0,
        r_s in 0.0f64..0.05,
        r_sh in 10.0f64..2000.0,
        frac in 0.0f64..1.1,
    ) {
        let c = SolarCellParams {
            i_l_a: i_l,
            i_o_a: 10f64.powf(log_io),
            xi,
            v_t_v: 0.02585,
            r_s_ohm: r_s,
            r_sh_ohm: r_sh,
            n_series: 1,
            n_parallel: 1,
        };
        let v = frac * c.v_oc_estimate();
        let i = solar_cell_current(v, &c).unwrap();
        prop_assert!(current_residual(v, i, &c).abs() <= 1e-9 * i_l.max(1.0));
        let reference = bisection_cell_current(v, &c);
        prop_assert!((i - reference).abs() <= 1e-9 * reference.abs().max(1.0));
        let i_higher = solar_cell_current(v + 0.01, &c).unwrap();
        prop_assert!(i_higher < i);
    }

    #[test]
    fn swing_moves_with_the_imbalance(df in -1.0f64..1.0, p in -10.0f64..10.0) {
        let cfg = SimConfig::default();
        let next = swing_step(df, p, &cfg).unwrap();
        let neutral = swing_step(df, 0.0, &cfg).unwrap();
        prop_assert_eq!(next > neutral, p > 0.0);
        prop_assert!(neutral.abs() <= df.abs());
    }

    #[test]
    fn wind_is_off_exactly_while_tripped(speeds in prop::collection::vec(0.0f64..20.0, 1..300)) {
        let mut farm = WindFarm::rated_at(4.5, 13.5, 1.225, 0.45, 15.0, 13.5, Profile::constant(0.0));
        let mut tripped = false;
        for v in speeds {
            let was = farm.online;
            farm = wind_trip_update(&farm, v);
            tripped = if tripped { v > 13.5 } else { v > 15.0 };
            prop_assert_eq!(farm.online, !tripped);
            if !was && farm.online {
                prop_assert!(v <= 13.5);
            }
            let p = wind_power(v, &farm);
            prop_assert_eq!(p == 0.0, tripped || v == 0.0);
            prop_assert!(p <= 4.5 + 1e-12);
        }
    }

    #[test]
    fn allocation_conserves_power_and_keeps_the_band(
        socs in prop::collection::vec(0.2f64..=0.8, 1..60),
        plugged in prop::collection::vec(any::<bool>(), 60),
        cmds in prop::collection::vec(-5.0f64..5.0, 1..50),
        dt in prop::sample::select(vec![0.01, 0.1, 1.0, 10.0]),
    ) {
        let units = socs.iter().enumerate().map(|(i, &s)| unit(s, plugged[i])).collect();
        let mut fleet = FleetState::new(units, &FleetParams::default());
        for (k, &cmd) in cmds.iter().enumerate() {
            let t = k as f64 * dt;
            fleet = aggregate_response_step(&fleet, cmd, t, dt).unwrap();
            let cap = dispatchable_limits(&fleet, t);
            prop_assert!(fleet.p_resp_mw <= cap.max_charge_mw + 1e-12);
            prop_assert!(-fleet.p_resp_mw <= cap.max_discharge_mw + 1e-12);
            let before: f64 = fleet.units.iter().map(|u| u.soc * u.capacity_kwh).sum();
            fleet = allocate_and_update_soc(&fleet, t, dt).unwrap();
            let allocated_mw: f64 = fleet.unit_power_kw.iter().sum::<f64>() * 1e-3;
            prop_assert!((allocated_mw - fleet.p_resp_mw).abs() < 1e-9);
            for u in &fleet.units {
                prop_assert!(u.soc >= 0.2 && u.soc <= 0.8, "soc {}", u.soc);
            }
            let after: f64 = fleet.units.iter().map(|u| u.soc * u.capacity_kwh).sum();
            let expected_kwh = fleet.p_resp_mw * 1e3 * dt / 3600.0;
            prop_assert!((after - before - expected_kwh).abs() < 1e-9 * (1.0 + before));
        }
    }

    #[test]
    fn summary_matches_a_direct_scan(devs in prop::collection::vec(-1.0f64..1.0, 1..200)) {
        let trace = SimTrace {
            f_nom_hz: 50.0,
            samples: devs.iter().enumerate().map(|(k, &d)| sample(k as f64, d)).collect(),
        };
        let s = summarize(&trace, 50.0).unwrap();
        let fs: Vec<f64> = devs.iter().map(|d| 50.0 + d).collect();
        let lo = fs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(s.f_min_hz, lo);
        prop_assert_eq!(s.f_max_hz, hi);
        prop_assert!(s.f_min_hz <= s.f_max_hz);
        prop_assert_eq!(s.max_abs_dev_hz, (lo - 50.0).abs().max((hi - 50.0).abs()));
        let first = fs.iter().position(|&f| f == lo).unwrap();
        prop_assert_eq!(s.time_of_nadir_s, first as f64);
    }

    #[test]
    fn config_rendering_round_trips(kp in 0.0f64..10.0, count in 0usize..500, soc_min in 0.05f64..0.4) {
        let mut cfg = RunConfig::default();
        cfg.controller.kp = kp;
        cfg.fleet.count = Some(count);
        cfg.fleet.params.soc_min = soc_min;
        let mut parsed = RunConfig::default();
        parsed.apply_text(&cfg.render()).unwrap();
        prop_assert_eq!(parsed, cfg);
    }
}

#[test]
fn fleet_energy_matches_the_integrated_response() {
    let params = FleetParams::default();
    let mut fleet = build_fleet::<f64>(100, 7, &params);
    let dt = 0.5;
    let energy = |f: &FleetState<f64>| f.units.iter().map(|u| u.soc * u.capacity_kwh).sum::<f64>();
    let start = energy(&fleet);
    let mut integral_mwh = 0.0;
    for k in 0..7200 {
        let t = 30_000.0 + k as f64 * dt;
        let cmd = 3.0 * (k as f64 / 300.0).sin();
        fleet = aggregate_response_step(&fleet, cmd, t, dt).unwrap();
        fleet = allocate_and_update_soc(&fleet, t, dt).unwrap();
        integral_mwh += fleet.p_resp_mw * dt / 3600.0;
    }
    let moved_kwh = energy(&fleet) - start;
    assert!((moved_kwh - params.efficiency * integral_mwh * 1e3).abs() < 1e-6, "{moved_kwh} vs {integral_mwh}");
}

#[test]
fn larger_fleet_never_has_less_headroom() {
    let params = FleetParams {
        soc_jitter: 0.0,
        plug_jitter_s: 0.0,
        ..FleetParams::default()
    };
    let small = build_fleet::<f64>(100, 1, &params);
    let large = build_fleet::<f64>(200, 1, &params);
    for k in 0..=288 {
        let t = k as f64 * 300.0;
        let (a, b) = (dispatchable_limits(&small, t), dispatchable_limits(&large, t));
        assert!(b.max_charge_mw >= a.max_charge_mw, "charge at {t}");
        assert!(b.max_discharge_mw >= a.max_discharge_mw, "discharge at {t}");
    }
}

#[test]
fn built_fleets_are_reproducible_and_balanced() {
    let params = FleetParams::default();
    let a = build_fleet::<f64>(200, 9, &params);
    assert_eq!(a, build_fleet::<f64>(200, 9, &params));
    for id in 1..=5 {
        assert_eq!(a.units.iter().filter(|u| u.profile_id == id).count(), 40);
    }
    let odd = build_fleet::<f64>(103, 9, &params);
    let counts: Vec<usize> = (1..=5).map(|id| odd.units.iter().filter(|u| u.profile_id == id).count()).collect();
    assert_eq!(counts, vec![21, 21, 21, 20, 20]);
}

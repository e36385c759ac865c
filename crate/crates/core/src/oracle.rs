//! Independent reference computations: plain bisection for the cell
//! current, a conventional discrete PID, a brute-force power sweep and
//! closed-form responses. None of them calls the code it checks.
//!
//! The `check_*` functions compare an implementation against its oracle
//! and report the worst discrepancy.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{apply_limiters, dead_band_filter, fopid_output, gl_fractional_op, ControllerState, FopidParams};
use crate::fleet::{
    aggregate_response_step, allocate_and_update_soc, dispatchable_limits, se_percent, EvUnit, FleetLimits,
    FleetParams, FleetState,
};
use crate::sim::{swing_step, SimConfig};
use crate::sources::mppt::MpptState;
use crate::sources::{solar_cell_current, SolarCellParams};

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    /// Worst discrepancy observed, in the units of `tolerance`.
    pub error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

/// Right-hand side of the implicit cell equation minus `i`, written out
/// independently of the solver.
fn cell_residual(v: f64, i: f64, c: &SolarCellParams<f64>) -> f64 {
    let vd = v + i * c.r_s_ohm;
    c.i_l_a - c.i_o_a * ((vd / (c.xi * c.v_t_v)).exp() - 1.0) - vd / c.r_sh_ohm - i
}

/// Cell current at `v` by bracketing and bisection to the last float.
pub fn bisection_cell_current(v: f64, c: &SolarCellParams<f64>) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while cell_residual(v, lo, c) < 0.0 {
        lo *= 2.0;
    }
    while cell_residual(v, hi, c) > 0.0 {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if cell_residual(v, mid, c) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Open-circuit voltage by bisection on the bisected current.
pub fn bisection_open_circuit_voltage(c: &SolarCellParams<f64>) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while bisection_cell_current(hi, c) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bisection_cell_current(mid, c) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cell maximum power point by exhaustive sweeps: `points` voltages over
/// `[0, V_oc]`, then three successively finer sweeps around the best one.
pub fn swept_mpp(c: &SolarCellParams<f64>, points: usize) -> (f64, f64) {
    let points = points.max(3);
    let (mut a, mut b) = (0.0, bisection_open_circuit_voltage(c));
    let mut best = (0.0, 0.0);
    for _ in 0..4 {
        let h = (b - a) / (points - 1) as f64;
        for k in 0..points {
            let v = a + h * k as f64;
            let p = v * bisection_cell_current(v, c);
            if p > best.1 {
                best = (v, p);
            }
        }
        a = (best.0 - h).max(0.0);
        b = best.0 + h;
    }
    best
}

/// Conventional discrete PID: rectangle-rule integral over the newest
/// `window` errors, backward-difference derivative.
#[derive(Debug, Clone)]
pub struct IntegerPid {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub dt_s: f64,
    window: usize,
    errors: VecDeque<f64>,
    previous: f64,
}

impl IntegerPid {
    pub fn new(kp: f64, ki: f64, kd: f64, dt_s: f64, window: usize) -> Self {
        IntegerPid {
            kp,
            ki,
            kd,
            dt_s,
            window: window.max(1),
            errors: VecDeque::new(),
            previous: 0.0,
        }
    }

    pub fn step(&mut self, e: f64) -> f64 {
        if self.errors.len() == self.window {
            self.errors.pop_front();
        }
        self.errors.push_back(e);
        let integral: f64 = self.errors.iter().sum::<f64>() * self.dt_s;
        let derivative = (e - self.previous) / self.dt_s;
        self.previous = e;
        self.kp * e + self.ki * integral + self.kd * derivative
    }
}

/// Closed-form step response of `k / (t_ev s + 1)` from rest.
pub fn first_order_step_response(k: f64, t_ev_s: f64, p_cmd_mw: f64, t_s: f64) -> f64 {
    k * p_cmd_mw * (1.0 - (-t_s / t_ev_s).exp())
}

/// Newton solver against bisection over `sets` random cells, each probed
/// at a random voltage in `[0, 1.05 V_oc]`. Error is relative to the
/// reference current, or absolute in amperes below 1 A.
pub fn check_solar_solver(sets: usize, seed: u64) -> OracleCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for _ in 0..sets {
        let c = SolarCellParams {
            i_l_a: rng.gen_range(0.5..10.0),
            i_o_a: 10f64.powf(rng.gen_range(-12.0..-6.0)),
            xi: rng.gen_range(1.0..2.0),
            v_t_v: rng.gen_range(0.022..0.030),
            r_s_ohm: rng.gen_range(0.0..0.05),
            r_sh_ohm: rng.gen_range(10.0..2000.0),
            n_series: 1,
            n_parallel: 1,
        };
        let v_oc = c.xi * c.v_t_v * (c.i_l_a / c.i_o_a).ln_1p();
        let v = rng.gen_range(0.0..1.05) * v_oc;
        let reference = bisection_cell_current(v, &c);
        let err = match solar_cell_current(v, &c) {
            Ok(i) => (i - reference).abs() / reference.abs().max(1.0),
            Err(_) => f64::INFINITY,
        };
        if !(err <= worst) {
            worst = err;
            detail = format!("worst at v = {v:.6} V, {c:?}");
        }
    }
    OracleCheck {
        name: format!("solar current: Newton vs bisection, {sets} cells"),
        error: worst,
        tolerance: 1e-9,
        detail,
    }
}

/// FOPID core with unit orders against [`IntegerPid`] on `samples` random
/// errors, with the integral window set to `memory_len`.
pub fn check_pid_reduction(samples: usize, memory_len: usize, seed: u64) -> OracleCheck {
    let dt = 0.01;
    let p = FopidParams::<f64> {
        lambda: 1.0,
        mu: 1.0,
        memory_len,
        ..FopidParams::default()
    };
    let mut state = ControllerState::new(&p, dt);
    let mut pid = IntegerPid::new(p.kp, p.ki, p.kd, dt, memory_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut at = 0;
    for k in 0..samples {
        let e = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(-2.0..2.0) };
        let err = (fopid_output(&mut state, e, &p) - pid.step(e)).abs();
        if !(err <= worst) {
            worst = err;
            at = k;
        }
    }
    OracleCheck {
        name: format!("FOPID with unit orders vs PID, {samples} samples, window {memory_len}"),
        error: worst,
        tolerance: 1e-9,
        detail: format!("worst at sample {at}"),
    }
}

/// Fleet large enough that a 3 MW command never meets a limit.
fn unconstrained_fleet(params: &FleetParams) -> FleetState<f64> {
    let units = (0..400)
        .map(|_| EvUnit {
            profile_id: 5,
            soc: 0.5,
            capacity_kwh: 40.0,
            p_charger_kw: 10.0,
            plug_schedule: vec![(0.0, 86_400.0)],
        })
        .collect();
    FleetState::new(units, params)
}

/// Aggregate response to a command step, integrated to `t_end_s`.
fn simulated_step_response(params: &FleetParams, p_cmd_mw: f64, t_end_s: f64, dt_s: f64) -> f64 {
    let mut fleet = unconstrained_fleet(params);
    let steps = (t_end_s / dt_s).round() as usize;
    for k in 0..steps {
        fleet = aggregate_response_step(&fleet, p_cmd_mw, k as f64 * dt_s, dt_s).expect("finite command");
    }
    fleet.p_resp_mw
}

/// Fraction of the steady state reached at `t = T_ev` with `dt = 0.01 s`.
/// Error is the distance from `1 - 1/e`.
pub fn check_ev_time_constant(params: &FleetParams) -> OracleCheck {
    let cmd = 3.0;
    let reached = simulated_step_response(params, cmd, params.t_ev_s, 0.01) / (params.k_ev * cmd);
    let analytic = 1.0 - (-1.0f64).exp();
    OracleCheck {
        name: "EV step response at t = T_ev".into(),
        error: (reached - analytic).abs(),
        tolerance: 0.01,
        detail: format!("reached {reached:.6} of steady state, analytic {analytic:.6}"),
    }
}

/// Observed convergence order of the aggregate response at `t = T_ev`
/// under successive halving of `dt`, starting from 0.1 s. Error is the
/// distance of the last observed order from 1.
pub fn check_ev_convergence_order(params: &FleetParams) -> OracleCheck {
    let cmd = 3.0;
    let exact = first_order_step_response(params.k_ev, params.t_ev_s, cmd, params.t_ev_s);
    let errors: Vec<f64> = (0..5)
        .map(|j| {
            let dt = 0.1 / 2f64.powi(j);
            (simulated_step_response(params, cmd, params.t_ev_s, dt) - exact).abs()
        })
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let worst = orders.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    OracleCheck {
        name: "EV response convergence order under dt halving".into(),
        error: worst,
        tolerance: 0.1,
        detail: format!(
            "errors [{}], orders {orders:.4?}",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// INC tracking from `0.85 V_mpp` against the swept maximum at each
/// irradiance. Error is the worst relative power shortfall over the last
/// 200 of 4000 tracker steps.
pub fn check_mppt(cell: &SolarCellParams<f64>, irradiances_w_m2: &[f64], step_v: f64, tolerance: f64) -> OracleCheck {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for &g in irradiances_w_m2 {
        let mut c = *cell;
        c.i_l_a = cell.i_l_a * g / 1000.0;
        let (v_mpp, p_mpp) = swept_mpp(&c, 400);
        let v_oc = bisection_open_circuit_voltage(&c);
        let mut tracker = MpptState::new(0.85 * v_mpp, step_v, tolerance, 1.2 * v_oc);
        let mut shortfall = 0.0f64;
        for k in 0..4000 {
            if tracker.step(&c).is_err() {
                shortfall = f64::INFINITY;
                break;
            }
            if k >= 3800 {
                shortfall = shortfall.max((p_mpp - tracker.measured_power_w()) / p_mpp);
            }
        }
        worst = worst.max(shortfall);
        detail.push(format!(
            "{g} W/m2: swept {p_mpp:.6} W at {v_mpp:.4} V, tracked {:.4} V",
            tracker.v_last
        ));
    }
    OracleCheck {
        name: format!("INC tracking vs swept maximum at {} irradiances", irradiances_w_m2.len()),
        error: worst,
        tolerance: 0.005,
        detail: detail.join("; "),
    }
}

fn hand(name: &str, value: f64, expected: f64) -> OracleCheck {
    OracleCheck {
        name: name.into(),
        error: (value - expected).abs(),
        tolerance: 1e-9,
        detail: format!("computed {value:.12}, hand value {expected}"),
    }
}

fn parked_unit(soc: f64) -> EvUnit<f64> {
    EvUnit {
        profile_id: 5,
        soc,
        capacity_kwh: 40.0,
        p_charger_kw: 10.0,
        plug_schedule: vec![(0.0, 86_400.0)],
    }
}

/// Implementation results on inputs whose answers follow by hand.
pub fn hand_values() -> Vec<OracleCheck> {
    let p = FopidParams::<f64>::default();
    let mut state = ControllerState::new(&p, 0.01);
    let fopid = fopid_output(&mut state, 1.0, &p);

    let backward = gl_fractional_op(&[0.0, 1.0], 1.0, 0.01, 1000);
    let running = gl_fractional_op(&[1.0; 250], -1.0, 0.01, 1000);

    let limited = apply_limiters(
        4.0,
        0.0,
        FleetLimits {
            max_charge_mw: 4.0,
            max_discharge_mw: 4.0,
        },
        2.0,
        0.5,
    );

    let params = FleetParams::default();
    let hundred = FleetState::new((0..100).map(|_| parked_unit(0.5)).collect(), &params);
    let limits = dispatchable_limits(&hundred, 0.0);
    let mut partial = hundred.clone();
    for u in partial.units.iter_mut().skip(37) {
        u.plug_schedule.clear();
    }

    let mut one = FleetState::new(vec![parked_unit(0.5)], &params);
    one.p_resp_mw = 0.01;
    for k in 0..3600 {
        one = allocate_and_update_soc(&one, k as f64, 1.0).expect("within tolerance");
    }

    vec![
        hand("FOPID single sample, default gains", fopid, 2.0002),
        hand("GL order 1 backward difference", backward, 100.0),
        hand("GL order -1 running sum of 250 ones", running, 2.5),
        hand("dead band passes 0.10 Hz", dead_band_filter(0.10, 50.0, 0.001), 0.10),
        hand("dead band blocks 0.04 Hz", dead_band_filter(0.04, 50.0, 0.001), 0.0),
        hand("rate limit binds before saturation", limited, 1.0),
        hand("100 EVs charge limit, MW", limits.max_charge_mw, 1.0),
        hand("100 EVs discharge limit, MW", limits.max_discharge_mw, 1.0),
        hand("SE with 37 of 100 plugged, %", se_percent(&partial, 0.0), 37.0),
        hand("SOC after 1 h at 10 kW", one.units[0].soc, 0.75),
        hand(
            "swing step from rest, 1.5 MW surplus, Hz",
            swing_step(0.0, 1.5, &SimConfig::default()).expect("finite"),
            0.005,
        ),
    ]
}

/// Every oracle comparison at the default parameters.
pub fn run_all(cell: &SolarCellParams<f64>, fleet: &FleetParams, seed: u64) -> Vec<OracleCheck> {
    let mut checks = hand_values();
    checks.extend([
        check_solar_solver(1000, seed),
        check_pid_reduction(10_000, 1000, seed),
        check_pid_reduction(10_000, 10_000, seed),
        check_ev_time_constant(fleet),
        check_ev_convergence_order(fleet),
        check_mppt(cell, &[200.0, 600.0, 1000.0], 1e-3, 5e-3),
    ]);
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> SolarCellParams<f64> {
        SolarCellParams {
            i_l_a: 8.0,
            i_o_a: 1e-10,
            xi: 1.3,
            v_t_v: 0.025_85,
            r_s_ohm: 0.005,
            r_sh_ohm: 1000.0,
            n_series: 1,
            n_parallel: 1,
        }
    }

    #[test]
    fn bisection_zeroes_the_residual() {
        let c = cell();
        for v in [0.0, 0.3, 0.6, 0.7] {
            let i = bisection_cell_current(v, &c);
            assert!(cell_residual(v, i, &c).abs() < 1e-12);
        }
        assert!((bisection_cell_current(0.0, &c) - 8.0 / (1.0 + 0.005 / 1000.0)).abs() < 1e-6);
    }

    #[test]
    fn open_circuit_current_vanishes() {
        let c = cell();
        let v = bisection_open_circuit_voltage(&c);
        assert!(bisection_cell_current(v, &c).abs() < 1e-9);
    }

    #[test]
    fn sweep_finds_an_interior_peak() {
        let c = cell();
        let (v, p) = swept_mpp(&c, 200);
        for dv in [-0.01, 0.01] {
            assert!((v + dv) * bisection_cell_current(v + dv, &c) < p);
        }
    }

    #[test]
    fn pid_hand_value() {
        let mut pid = IntegerPid::new(1.0, 0.02, 0.01, 0.01, 1000);
        assert!((pid.step(1.0) - 2.0002).abs() < 1e-12);
        assert!((pid.step(1.0) - (1.0 + 0.02 * 0.02)).abs() < 1e-12);
    }

    #[test]
    fn first_order_reaches_one_minus_inverse_e() {
        let v = first_order_step_response(0.333, 1.0, 3.0, 1.0);
        assert!((v / 0.999 - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn hand_values_hold() {
        for c in hand_values() {
            assert!(c.passed(), "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn quick_checks_pass() {
        assert!(check_solar_solver(50, 1).passed());
        assert!(check_pid_reduction(2000, 100, 1).passed());
        assert!(check_ev_time_constant(&FleetParams::default()).passed());
    }
}

//! Controller pipeline: dead band, FOPID core, sign gain, mode gate and the
//! two output limiters.

use crate::control::fopid::{fopid_output, ControllerState, FopidParams};
use crate::control::Mode;
use crate::fleet::FleetLimits;
use crate::scalar::{clamp, Scalar};

/// Zeroes deviations inside `±dead_band_pu * f_nom`, passes others through.
pub fn dead_band_filter<T: Scalar>(delta_f_hz: T, f_nom_hz: T, dead_band_pu: T) -> T {
    if (delta_f_hz / f_nom_hz).abs() <= dead_band_pu {
        T::zero()
    } else {
        delta_f_hz
    }
}

/// Variant that removes the band from the signal, keeping it continuous.
pub fn dead_band_offset<T: Scalar>(delta_f_hz: T, f_nom_hz: T, dead_band_pu: T) -> T {
    let edge = dead_band_pu * f_nom_hz;
    if delta_f_hz.abs() <= edge {
        T::zero()
    } else {
        delta_f_hz - edge * delta_f_hz.signum()
    }
}

/// Mode gate. `p_t_mw` is generation minus non-EV load.
///
/// Regulation needs a deficit, a controller signal above
/// `k2_threshold * k1 / dt`, and some available vehicles; a surplus means
/// charging; everything else is idle. Deficit and surplus are measured
/// beyond `balance_band_mw`.
pub fn select_mode<T: Scalar>(p_t_mw: T, u_signal: T, se_percent: T, p: &FopidParams<T>, dt_s: T) -> Mode {
    let u_scale = p.k1 / dt_s;
    let band = p.balance_band_mw;
    if p_t_mw < -band && u_signal.abs() > p.k2_threshold * u_scale.abs() && se_percent > T::zero() {
        Mode::Regulation
    } else if p_t_mw > band {
        Mode::Charging
    } else {
        Mode::Idle
    }
}

/// Rate limiter, then saturation into `[-max_discharge, +max_charge]`.
pub fn apply_limiters<T: Scalar>(
    raw_cmd_mw: T,
    last_output_mw: T,
    limits: FleetLimits<T>,
    rate_limit_mw_per_s: T,
    dt_s: T,
) -> T {
    let max_step = rate_limit_mw_per_s * dt_s;
    let rated = clamp(raw_cmd_mw, last_output_mw - max_step, last_output_mw + max_step);
    clamp(rated, -limits.max_discharge_mw, limits.max_charge_mw)
}

/// Grid-side measurements the controller sees on one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerInput<T> {
    pub delta_f_hz: T,
    pub f_nom_hz: T,
    /// Generation minus non-EV load.
    pub p_t_mw: T,
    pub se_percent: T,
    pub limits: FleetLimits<T>,
}

/// One controller step with the FOPID core. Returns the fleet power
/// command in MW (`+` = charge).
pub fn controller_step<T: Scalar>(
    state: &mut ControllerState<T>,
    input: &ControllerInput<T>,
    p: &FopidParams<T>,
    dt_s: T,
) -> T {
    controller_step_with(state, input, p, dt_s, |s, e| fopid_output(s, e, p))
}

/// The controller pipeline around an arbitrary core mapping the speed
/// error to a control signal.
pub fn controller_step_with<T: Scalar>(
    state: &mut ControllerState<T>,
    input: &ControllerInput<T>,
    p: &FopidParams<T>,
    dt_s: T,
    core: impl FnOnce(&mut ControllerState<T>, T) -> T,
) -> T {
    let filtered = if p.dead_band_offset {
        dead_band_offset(input.delta_f_hz, input.f_nom_hz, p.dead_band_pu)
    } else {
        dead_band_filter(input.delta_f_hz, input.f_nom_hz, p.dead_band_pu)
    };
    // Reference minus measured speed.
    let error = -filtered * p.error_gain_per_hz;
    let u = core(state, error);
    let signal = p.g1 * u;
    let mode = select_mode(input.p_t_mw, signal, input.se_percent, p, dt_s);
    let raw = match mode {
        Mode::Regulation => signal * p.output_gain_mw,
        Mode::Charging => input.p_t_mw.min(input.limits.max_charge_mw),
        Mode::Idle => T::zero(),
    };
    let out = apply_limiters(raw, state.last_output_mw, input.limits, p.rate_limit_mw_per_s, dt_s);
    state.last_output_mw = out;
    state.last_signal = signal;
    state.mode = mode;
    out
}

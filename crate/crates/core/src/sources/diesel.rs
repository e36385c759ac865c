use crate::error::SimError;
use crate::scalar::{clamp, Scalar};

/// Diesel genset seen through its speed governor: a first-order actuator
/// lag towards a droop-corrected dispatch setpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct DieselGen<T> {
    pub p_rated_mw: T,
    pub droop_r_pu: T,
    pub t_gov_s: T,
    pub f_nom_hz: T,
    /// Dispatch setpoint, refreshed every step from the previous net demand.
    pub p_ref_mw: T,
    /// Mechanical output, the state of the actuator lag.
    pub p_mech_mw: T,
}

impl<T: Scalar> DieselGen<T> {
    pub fn new(p_rated_mw: T, droop_r_pu: T, t_gov_s: T, f_nom_hz: T) -> Self {
        DieselGen {
            p_rated_mw,
            droop_r_pu,
            t_gov_s,
            f_nom_hz,
            p_ref_mw: T::zero(),
            p_mech_mw: T::zero(),
        }
    }

    /// Puts the unit in equilibrium at `p_mw` (setpoint and output agree).
    pub fn dispatch_steady(&mut self, p_mw: T) {
        let p = clamp(p_mw, T::zero(), self.p_rated_mw);
        self.p_ref_mw = p;
        self.p_mech_mw = p;
    }

    /// Load-following dispatch: the setpoint covers whatever the renewables
    /// leave uncovered, within the unit rating.
    pub fn set_reference(&mut self, net_demand_mw: T) {
        self.p_ref_mw = clamp(net_demand_mw, T::zero(), self.p_rated_mw);
    }

    /// Droop-corrected, rating-clamped output the actuator is driving to.
    pub fn droop_target(&self, delta_f_hz: T) -> T {
        let correction = delta_f_hz / self.f_nom_hz / self.droop_r_pu * self.p_rated_mw;
        clamp(self.p_ref_mw - correction, T::zero(), self.p_rated_mw)
    }
}

/// Advances the governor by one explicit-Euler step of length `dt_s`.
pub fn governor_step<T: Scalar>(
    gen: &DieselGen<T>,
    delta_f_hz: T,
    dt_s: T,
) -> Result<DieselGen<T>, SimError> {
    if !delta_f_hz.is_finite() || !gen.p_ref_mw.is_finite() || !gen.p_mech_mw.is_finite() {
        return Err(SimError::non_finite(
            "diesel",
            f64::NAN,
            format!("delta_f = {delta_f_hz}, p_ref = {}, p_mech = {}", gen.p_ref_mw, gen.p_mech_mw),
        ));
    }
    let target = gen.droop_target(delta_f_hz);
    let mut next = gen.clone();
    let p = gen.p_mech_mw + dt_s * (target - gen.p_mech_mw) / gen.t_gov_s;
    next.p_mech_mw = clamp(p, T::zero(), gen.p_rated_mw);
    Ok(next)
}

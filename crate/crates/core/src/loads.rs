//! Demand side: residential feeder and the squirrel-cage induction machine
//! used as the industrial contingency load.
//!
//! Reactive power is carried as a power factor for reference only; the
//! frequency model sees active power.

use crate::profile::Profile;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidentialLoad<T> {
    pub p_nominal_mw: T,
    pub power_factor: T,
    /// Demand multiplier in per-unit of nominal.
    pub profile: Profile<T>,
}

impl<T: Scalar> ResidentialLoad<T> {
    pub fn validate(&self) -> Result<(), String> {
        if self.profile.min_value() < T::zero() || self.profile.max_value() > lit(1.5) {
            return Err("residential multiplier must stay within [0, 1.5] pu".into());
        }
        Ok(())
    }
}

pub fn residential_power<T: Scalar>(load: &ResidentialLoad<T>, t_s: f64) -> T {
    load.profile.at(t_s) * load.p_nominal_mw
}

/// Direct-on-line started induction machine, modelled by its active-power
/// envelope: zero before start, an inrush that decays linearly to the rated
/// draw across the start window, then rated draw.
///
/// Rated draw is the apparent rating times power factor. With a fan-type
/// load (torque rising with the square of speed) the machine settles at its
/// rated operating point, so no speed state is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct AsyncMachine<T> {
    pub s_rated_mva: T,
    pub power_factor: T,
    pub inrush_factor: T,
    /// `None` until the machine is switched on.
    pub start_time_s: Option<f64>,
    pub start_window_s: f64,
}

impl<T: Scalar> AsyncMachine<T> {
    pub fn new(s_rated_mva: T, power_factor: T, inrush_factor: T, start_window_s: f64) -> Self {
        AsyncMachine {
            s_rated_mva,
            power_factor,
            inrush_factor,
            start_time_s: None,
            start_window_s,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.inrush_factor < lit(6.0) || self.inrush_factor > lit(8.0) {
            return Err(format!("inrush factor {} outside [6, 8]", self.inrush_factor));
        }
        if self.s_rated_mva < T::zero() || self.start_window_s < 0.0 {
            return Err("machine rating and start window must be non-negative".into());
        }
        Ok(())
    }

    pub fn rated_active_mw(&self) -> T {
        self.s_rated_mva * self.power_factor
    }

    pub fn running(&self, t_s: f64) -> bool {
        self.start_time_s.is_some_and(|s| t_s >= s)
    }
}

pub fn acm_power<T: Scalar>(m: &AsyncMachine<T>, t_s: f64) -> T {
    let Some(start) = m.start_time_s else {
        return T::zero();
    };
    if t_s < start {
        return T::zero();
    }
    let rated = m.rated_active_mw();
    let elapsed = t_s - start;
    if m.start_window_s > 0.0 && elapsed <= m.start_window_s {
        let frac = lit::<T>(elapsed / m.start_window_s);
        rated * (m.inrush_factor - (m.inrush_factor - T::one()) * frac)
    } else {
        rated
    }
}

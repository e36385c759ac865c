use crate::error::SimError;
use crate::profile::Profile;
use crate::scalar::{clamp, lit, Scalar};
use crate::sources::mppt::{golden_section_mpp, MpptState};
use crate::sources::solar::SolarCellParams;

/// Irradiance at which the reference photocurrent is specified.
pub const REFERENCE_IRRADIANCE_W_M2: f64 = 1000.0;

/// PV farm: a series/parallel array of identical cells behind an INC
/// tracker and an inverter whose output is clamped to the farm rating.
#[derive(Debug, Clone, PartialEq)]
pub struct PvFarm<T> {
    pub p_rated_mw: T,
    /// Cell at reference irradiance; `i_l_a` scales linearly from here.
    pub cell: SolarCellParams<T>,
    pub irradiance_profile: Profile<T>,
    pub mppt: MpptState<T>,
    /// Scenario hook scaling the DC output (1 = unimpaired).
    pub derate_factor: T,
    irradiance_now: T,
}

impl<T: Scalar> PvFarm<T> {
    /// Sizes `n_parallel` so the array delivers `p_rated_mw` at its maximum
    /// power point under reference irradiance.
    pub fn sized(
        p_rated_mw: T,
        mut cell: SolarCellParams<T>,
        irradiance_profile: Profile<T>,
        mppt_step_v: T,
        mppt_tolerance: T,
    ) -> Result<Self, SimError> {
        cell.validate().map_err(SimError::Setup)?;
        let (v_mpp, p_mpp) = golden_section_mpp(&cell)?;
        let per_string_w = p_mpp * lit(cell.n_series as f64);
        let n_parallel = (p_rated_mw * lit(1e6) / per_string_w).round();
        cell.n_parallel = n_parallel.to_u32().unwrap_or(1).max(1);
        let v_oc = cell.v_oc_estimate();
        let v_start = v_mpp * lit(0.85);
        Ok(PvFarm {
            p_rated_mw,
            cell,
            irradiance_profile,
            mppt: MpptState::new(v_start, mppt_step_v, mppt_tolerance, v_oc * lit(1.2)),
            derate_factor: T::one(),
            irradiance_now: T::zero(),
        })
    }

    /// Cell parameters with the photocurrent scaled to `irradiance_w_m2`.
    pub fn cell_at(&self, irradiance_w_m2: T) -> SolarCellParams<T> {
        let mut c = self.cell;
        c.i_l_a = self.cell.i_l_a * irradiance_w_m2.max(T::zero()) / lit(REFERENCE_IRRADIANCE_W_M2);
        c
    }

    pub fn irradiance(&self, t_s: f64) -> T {
        self.irradiance_profile.at(t_s)
    }

    /// Runs one tracker step at `irradiance_w_m2`.
    pub(crate) fn track(&mut self, irradiance_w_m2: T) -> Result<(), SimError> {
        self.irradiance_now = irradiance_w_m2;
        if irradiance_w_m2 > T::zero() {
            let cell = self.cell_at(irradiance_w_m2);
            self.mppt.step(&cell)?;
        }
        Ok(())
    }

    /// Samples the profile at `t_s` and advances the tracker.
    pub fn update(&mut self, t_s: f64) -> Result<(), SimError> {
        let g = self.irradiance(t_s);
        self.track(g)
    }

    /// Array DC power at the last measured operating point, before derating.
    pub fn dc_power_mw(&self) -> T {
        if self.irradiance_now <= T::zero() {
            return T::zero();
        }
        let cells = lit::<T>(self.cell.n_series as f64 * self.cell.n_parallel as f64);
        (self.mppt.measured_power_w() * cells / lit(1e6)).max(T::zero())
    }

    /// Inverter output after derating and the rating clamp.
    pub fn output_mw(&self) -> T {
        clamp(self.dc_power_mw() * self.derate_factor, T::zero(), self.p_rated_mw)
    }
}

/// Farm output at `t_s`: zero in the dark, otherwise the tracked power.
pub fn pv_farm_power<T: Scalar>(farm: &PvFarm<T>, t_s: f64) -> T {
    if farm.irradiance(t_s) <= T::zero() {
        T::zero()
    } else {
        farm.output_mw()
    }
}

//! Incremental-conductance maximum power point tracking.

use crate::error::SimError;
use crate::scalar::{lit, Scalar};
use crate::sources::solar::{solve_current, SolarCellParams};

/// Tracker state, expressed per cell (array scaling leaves the criterion
/// unchanged).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpptState<T> {
    /// Voltage the converter will impose on the next step.
    pub v_op: T,
    /// Last measured operating point.
    pub v_last: T,
    pub i_last: T,
    /// Fixed perturbation applied per step.
    pub step_v: T,
    /// Relative band on `dI/dV + I/V` inside which the voltage holds.
    pub tolerance: T,
    pub v_min: T,
    pub v_max: T,
    measured: bool,
}

/// Direction chosen by the INC criterion on one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncMove {
    Up,
    Down,
    Hold,
}

impl<T: Scalar> MpptState<T> {
    pub fn new(v_start: T, step_v: T, tolerance: T, v_max: T) -> Self {
        MpptState {
            v_op: v_start,
            v_last: T::zero(),
            i_last: T::zero(),
            step_v,
            tolerance,
            v_min: step_v,
            v_max,
            measured: false,
        }
    }

    /// INC decision from two consecutive operating points.
    pub fn decide(v: T, i: T, v_prev: T, i_prev: T, tolerance: T) -> IncMove {
        let dv = v - v_prev;
        let di = i - i_prev;
        if dv == T::zero() {
            return if di == T::zero() {
                IncMove::Hold
            } else if di > T::zero() {
                IncMove::Up
            } else {
                IncMove::Down
            };
        }
        let conductance = i / v;
        let g = di / dv + conductance;
        if g.abs() <= tolerance * conductance.abs() {
            IncMove::Hold
        } else if g > T::zero() {
            IncMove::Up
        } else {
            IncMove::Down
        }
    }

    /// Measures the cell at the current voltage, then perturbs.
    pub fn step(&mut self, cell: &SolarCellParams<T>) -> Result<IncMove, SimError> {
        let guess = if self.measured { Some(self.i_last) } else { None };
        let i = solve_current(self.v_op, cell, guess)?;
        let mv = if self.measured {
            Self::decide(self.v_op, i, self.v_last, self.i_last, self.tolerance)
        } else {
            IncMove::Up
        };
        self.v_last = self.v_op;
        self.i_last = i;
        self.measured = true;
        self.v_op = match mv {
            IncMove::Up => self.v_op + self.step_v,
            IncMove::Down => self.v_op - self.step_v,
            IncMove::Hold => self.v_op,
        }
        .max(self.v_min)
        .min(self.v_max);
        Ok(mv)
    }

    /// Cell power at the last measured point.
    pub fn measured_power_w(&self) -> T {
        if self.measured {
            self.v_last * self.i_last
        } else {
            T::zero()
        }
    }
}

/// One tracker step on `farm` at the given irradiance. Dark steps leave the
/// tracker untouched.
pub fn inc_mppt_step<T: Scalar>(
    farm: &crate::sources::PvFarm<T>,
    irradiance_w_m2: T,
) -> Result<crate::sources::PvFarm<T>, SimError> {
    let mut next = farm.clone();
    next.track(irradiance_w_m2)?;
    Ok(next)
}

/// Locates the cell maximum power point by golden-section search on
/// `[0, V_oc]`. Used to size arrays, not as a tracking algorithm.
pub fn golden_section_mpp<T: Scalar>(cell: &SolarCellParams<T>) -> Result<(T, T), SimError> {
    let power = |v: T| solve_current(v, cell, None).map(|i| v * i);
    let ratio = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (T::zero(), cell.v_oc_estimate());
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut pc, mut pd) = (power(c)?, power(d)?);
    for _ in 0..200 {
        if (b - a).abs() < T::epsilon() * lit(16.0) {
            break;
        }
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - ratio * (b - a);
            pc = power(c)?;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + ratio * (b - a);
            pd = power(d)?;
        }
    }
    let v = (a + b) / lit(2.0);
    Ok((v, power(v)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holds_when_nothing_changes() {
        assert_eq!(MpptState::decide(0.5, 7.0, 0.5, 7.0, 0.005), IncMove::Hold);
    }

    #[test]
    fn dv_zero_follows_current_change() {
        assert_eq!(MpptState::decide(0.5, 7.1, 0.5, 7.0, 0.005), IncMove::Up);
        assert_eq!(MpptState::decide(0.5, 6.9, 0.5, 7.0, 0.005), IncMove::Down);
    }

    #[test]
    fn left_of_peak_moves_up_right_of_peak_moves_down() {
        // Flat current left of the knee: dI/dV ~ 0 > -I/V.
        assert_eq!(MpptState::decide(0.3, 7.99, 0.29, 7.991, 0.005), IncMove::Up);
        // Steep drop right of the knee.
        assert_eq!(MpptState::decide(0.8, 3.0, 0.79, 4.0, 0.005), IncMove::Down);
    }

    #[test]
    fn golden_section_finds_interior_peak() {
        let cell = SolarCellParams {
            i_l_a: 8.0,
            i_o_a: 1e-10,
            xi: 1.3,
            v_t_v: 0.025_85,
            r_s_ohm: 0.005,
            r_sh_ohm: 1000.0,
            n_series: 1,
            n_parallel: 1,
        };
        let (v, p) = golden_section_mpp(&cell).unwrap();
        assert!(v > 0.3 && v < cell.v_oc_estimate());
        for dv in [-0.01, 0.01] {
            let i = solve_current(v + dv, &cell, None).unwrap();
            assert!((v + dv) * i <= p);
        }
    }
}

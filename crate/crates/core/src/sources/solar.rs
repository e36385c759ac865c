//! Single-diode solar cell.
//!
//! The terminal current solves the implicit relation
//!
//! ```text
//! I = I_L - I_o * (exp((V + I*R_s) / (xi*V_T)) - 1) - (V + I*R_s) / R_sh
//! ```
//!
//! whose right-hand side minus `I` is strictly decreasing in `I`, so the
//! root is unique. It is found with Newton's method safeguarded by a
//! bracket that falls back to bisection whenever a Newton step leaves it.

use crate::error::SimError;
use crate::scalar::{lit, Scalar};

const MAX_ITERATIONS: usize = 200;
const MAX_BRACKET_EXPANSIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarCellParams<T> {
    /// Photo-generated current, linear in irradiance.
    pub i_l_a: T,
    /// Diode saturation current.
    pub i_o_a: T,
    /// Diode ideality factor.
    pub xi: T,
    /// Thermal voltage.
    pub v_t_v: T,
    pub r_s_ohm: T,
    pub r_sh_ohm: T,
    pub n_series: u32,
    pub n_parallel: u32,
}

impl<T: Scalar> SolarCellParams<T> {
    pub fn validate(&self) -> Result<(), String> {
        let ok = self.i_o_a > T::zero()
            && self.xi >= T::one()
            && self.xi <= lit(2.0)
            && self.v_t_v > T::zero()
            && self.r_s_ohm >= T::zero()
            && self.r_sh_ohm > T::zero()
            && self.i_l_a >= T::zero()
            && self.n_series >= 1
            && self.n_parallel >= 1;
        if ok {
            Ok(())
        } else {
            Err(format!("invalid solar cell parameters: {self:?}"))
        }
    }

    fn thermal_scale(&self) -> T {
        self.xi * self.v_t_v
    }

    /// Residual of the implicit current equation (right side minus `I`) and
    /// its derivative with respect to `I`.
    fn residual(&self, v: T, i: T) -> (T, T) {
        let vd = v + i * self.r_s_ohm;
        let a = self.thermal_scale();
        let x = vd / a;
        let f = self.i_l_a - self.i_o_a * x.exp_m1() - vd / self.r_sh_ohm - i;
        let df = -self.i_o_a * self.r_s_ohm / a * x.exp() - self.r_s_ohm / self.r_sh_ohm - T::one();
        (f, df)
    }

    /// Open-circuit voltage of a single cell, ignoring the shunt path.
    pub fn v_oc_estimate(&self) -> T {
        self.thermal_scale() * (self.i_l_a / self.i_o_a).ln_1p()
    }

    fn tolerance(&self) -> T {
        let floor = (T::epsilon() * lit(256.0)).max(lit(1e-10));
        floor * self.i_l_a.max(T::one())
    }
}

/// Cell terminal current at voltage `v_pv`.
pub fn solar_cell_current<T: Scalar>(v_pv: T, p: &SolarCellParams<T>) -> Result<T, SimError> {
    solve_current(v_pv, p, None)
}

/// As [`solar_cell_current`], starting Newton from `guess` (typically the
/// previous operating point).
pub fn solve_current<T: Scalar>(
    v_pv: T,
    p: &SolarCellParams<T>,
    guess: Option<T>,
) -> Result<T, SimError> {
    let fail = |iterations: usize, residual: T| SimError::SolverDiverged {
        v_pv: v_pv.as_f64(),
        iterations,
        residual: residual.as_f64(),
        params: format!("{p:?}"),
    };
    if !v_pv.is_finite() {
        return Err(fail(0, T::nan()));
    }
    let tol = p.tolerance();

    // Bracket the root: f(lo) >= 0 >= f(hi).
    let start = guess.filter(|g| g.is_finite()).unwrap_or(p.i_l_a);
    let (f0, _) = p.residual(v_pv, start);
    if f0.abs() <= tol {
        return Ok(start);
    }
    let mut width = p.i_l_a.max(T::one());
    let (mut lo, mut hi) = (start, start);
    let mut expansions = 0;
    if f0 > T::zero() {
        loop {
            hi = start + width;
            if p.residual(v_pv, hi).0 <= T::zero() {
                break;
            }
            lo = hi;
            width = width + width;
            expansions += 1;
            if expansions > MAX_BRACKET_EXPANSIONS {
                return Err(fail(0, f0));
            }
        }
    } else {
        loop {
            lo = start - width;
            if p.residual(v_pv, lo).0 >= T::zero() {
                break;
            }
            hi = lo;
            width = width + width;
            expansions += 1;
            if expansions > MAX_BRACKET_EXPANSIONS {
                return Err(fail(0, f0));
            }
        }
    }

    let two = lit::<T>(2.0);
    let mut i = start.max(lo).min(hi);
    let mut last_f = f0;
    for iter in 1..=MAX_ITERATIONS {
        let (f, df) = p.residual(v_pv, i);
        last_f = f;
        if f.abs() <= tol {
            return Ok(i);
        }
        if f > T::zero() {
            lo = i;
        } else {
            hi = i;
        }
        let newton = i - f / df;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) / two
        };
        if next == i {
            // Bracket collapsed to adjacent floats; accept if the residual
            // is within what the arithmetic can resolve.
            let slack = df.abs() * (i.abs().max(T::one()) * T::epsilon() * lit(4.0));
            return if f.abs() <= tol.max(slack) {
                Ok(i)
            } else {
                Err(fail(iter, f))
            };
        }
        i = next;
    }
    Err(fail(MAX_ITERATIONS, last_f))
}

/// Residual of the current equation, exposed for solution checks.
pub fn current_residual<T: Scalar>(v_pv: T, i: T, p: &SolarCellParams<T>) -> T {
    p.residual(v_pv, i).0
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn silicon(i_l: f64) -> SolarCellParams<f64> {
        SolarCellParams {
            i_l_a: i_l,
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
    fn dark_cell_at_zero_volts_carries_no_current() {
        let i = solar_cell_current(0.0, &silicon(0.0)).unwrap();
        assert!(i.abs() < 1e-12);
    }

    #[test]
    fn ideal_short_circuit_equals_photocurrent() {
        let mut p = silicon(8.0);
        p.r_s_ohm = 0.0;
        p.r_sh_ohm = 1e12;
        let i = solar_cell_current(0.0, &p).unwrap();
        assert!((i - 8.0).abs() < 1e-10);
    }

    #[test]
    fn residual_within_tolerance_across_the_curve() {
        let p = silicon(8.0);
        let voc = p.v_oc_estimate();
        for k in 0..=100 {
            let v = voc * 1.1 * k as f64 / 100.0;
            let i = solar_cell_current(v, &p).unwrap();
            assert!(current_residual(v, i, &p).abs() < 1e-10 * 8.0, "v = {v}");
        }
    }

    #[test]
    fn current_decreases_with_voltage() {
        let p = silicon(5.0);
        let mut prev = f64::INFINITY;
        for k in 0..80 {
            let i = solar_cell_current(k as f64 * 0.01, &p).unwrap();
            assert!(i < prev);
            prev = i;
        }
    }

    #[test]
    fn warm_start_agrees_with_cold_start() {
        let p = silicon(8.0);
        let cold = solar_cell_current(0.7, &p).unwrap();
        let warm = solve_current(0.7, &p, Some(cold * 0.5)).unwrap();
        assert!((cold - warm).abs() < 1e-10);
    }

    #[test]
    fn single_precision_converges() {
        let p = SolarCellParams::<f32> {
            i_l_a: 8.0,
            i_o_a: 1e-10,
            xi: 1.3,
            v_t_v: 0.025_85,
            r_s_ohm: 0.005,
            r_sh_ohm: 1000.0,
            n_series: 1,
            n_parallel: 1,
        };
        let i = solar_cell_current(0.6f32, &p).unwrap();
        assert!(i > 7.0 && i <= 8.0);
    }

    #[test]
    fn non_finite_voltage_is_a_solver_fault() {
        assert!(matches!(
            solar_cell_current(f64::NAN, &silicon(8.0)),
            Err(SimError::SolverDiverged { .. })
        ));
    }
}

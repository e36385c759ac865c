use crate::control::gl::{ErrorHistory, GlKernel};
use crate::control::Mode;
use crate::scalar::{lit, Scalar};

/// Gains, fractional orders and gating constants of the primary frequency
/// controller.
#[derive(Debug, Clone, PartialEq)]
pub struct FopidParams<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    /// Order of the fractional integral.
    pub lambda: T,
    /// Order of the fractional derivative.
    pub mu: T,
    /// GL truncation window in samples.
    pub memory_len: usize,
    /// Sign/scale applied to the FOPID output.
    pub g1: T,
    /// Compare-to-constant level; the regulation gate opens above
    /// `k2_threshold * k1 / dt`.
    pub k1: T,
    pub k2_threshold: T,
    pub dead_band_pu: T,
    /// Offset the error by the band edge instead of passing it through.
    pub dead_band_offset: bool,
    /// Converts the frequency error in Hz into the controller's speed error
    /// (2π gives rad/s).
    pub error_gain_per_hz: T,
    /// MW of fleet command per unit of scaled controller output.
    pub output_gain_mw: T,
    pub rate_limit_mw_per_s: T,
    /// Surplus or deficit below this magnitude counts as balance for the
    /// mode gate.
    pub balance_band_mw: T,
}

impl<T: Scalar> Default for FopidParams<T> {
    fn default() -> Self {
        FopidParams {
            kp: T::one(),
            ki: lit(0.02),
            kd: lit(0.01),
            lambda: T::one(),
            mu: T::one(),
            memory_len: 1000,
            g1: -T::one(),
            k1: lit(0.01),
            k2_threshold: lit(0.5),
            dead_band_pu: lit(0.001),
            dead_band_offset: false,
            error_gain_per_hz: T::TAU(),
            output_gain_mw: lit(4.0),
            rate_limit_mw_per_s: lit(2.0),
            balance_band_mw: lit(1e-6),
        }
    }
}

impl<T: Scalar> FopidParams<T> {
    pub fn validate(&self) -> Result<(), String> {
        if self.memory_len < 1 {
            return Err("memory_len must be at least 1".into());
        }
        if !(self.dead_band_pu >= T::zero()) {
            return Err("dead band must be non-negative".into());
        }
        let two = lit::<T>(2.0);
        for (name, order) in [("lambda", self.lambda), ("mu", self.mu)] {
            if !(order > T::zero() && order < two) {
                return Err(format!("{name} must lie in (0, 2)"));
            }
        }
        let finite = [
            self.kp,
            self.ki,
            self.kd,
            self.g1,
            self.k1,
            self.k2_threshold,
            self.error_gain_per_hz,
            self.output_gain_mw,
        ]
        .iter()
        .all(|g| g.is_finite());
        if !finite {
            return Err("controller gains must be finite".into());
        }
        if !(self.balance_band_mw >= T::zero()) {
            return Err("balance band must be non-negative".into());
        }
        if !(self.rate_limit_mw_per_s > T::zero()) {
            return Err("rate limit must be positive".into());
        }
        Ok(())
    }
}

/// Error history plus the precomputed fractional operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState<T> {
    pub history: ErrorHistory<T>,
    pub integral: GlKernel<T>,
    pub derivative: GlKernel<T>,
    pub last_output_mw: T,
    pub last_signal: T,
    pub mode: Mode,
}

impl<T: Scalar> ControllerState<T> {
    pub fn new(p: &FopidParams<T>, dt_s: T) -> Self {
        ControllerState {
            history: ErrorHistory::new(p.memory_len),
            integral: GlKernel::new(-p.lambda, dt_s, p.memory_len),
            derivative: GlKernel::new(p.mu, dt_s, p.memory_len),
            last_output_mw: T::zero(),
            last_signal: T::zero(),
            mode: Mode::Idle,
        }
    }
}

/// Appends `error` to the history and returns
/// `kp*e + ki*D^-lambda e + kd*D^mu e`.
pub fn fopid_output<T: Scalar>(state: &mut ControllerState<T>, error: T, p: &FopidParams<T>) -> T {
    state.history.push(error);
    let i_term = state.integral.apply(&state.history);
    let d_term = state.derivative.apply(&state.history);
    p.kp * error + p.ki * i_term + p.kd * d_term
}

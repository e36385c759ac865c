use crate::error::SimError;
use crate::scalar::{lit, Scalar};
use crate::sim::SimConfig;

/// One explicit-Euler step of the per-unit aggregate swing equation
/// `d(df_pu)/dt = (P_imb/S_base - D*df_pu) / (2H)`.
///
/// `p_imbalance_mw` is generation minus demand. Returns the new deviation
/// in Hz.
pub fn swing_step<T: Scalar>(delta_f_hz: T, p_imbalance_mw: T, cfg: &SimConfig) -> Result<T, SimError> {
    if !delta_f_hz.is_finite() || !p_imbalance_mw.is_finite() {
        return Err(SimError::non_finite(
            "swing",
            f64::NAN,
            format!("delta_f = {delta_f_hz}, imbalance = {p_imbalance_mw} MW"),
        ));
    }
    let f_nom = lit::<T>(cfg.f_nom_hz);
    let df_pu = delta_f_hz / f_nom;
    let p_pu = p_imbalance_mw / lit(cfg.s_base_mva);
    let rate = (p_pu - lit::<T>(cfg.damping_d_pu) * df_pu) / lit(2.0 * cfg.inertia_h_s);
    Ok((df_pu + lit::<T>(cfg.dt_s) * rate) * f_nom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_is_fixed() {
        let c = SimConfig::default();
        assert_eq!(swing_step(0.0, 0.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn one_step_hand_value() {
        let c = SimConfig::default();
        let df: f64 = swing_step(0.0, 1.5, &c).unwrap();
        assert!((df - 0.005).abs() < 1e-15);
    }

    #[test]
    fn settles_to_closed_form() {
        let c = SimConfig::default();
        let mut df = 0.0;
        for _ in 0..40_000 {
            df = swing_step(df, 0.75, &c).unwrap();
        }
        let expected = c.f_nom_hz * (0.75 / c.s_base_mva) / c.damping_d_pu;
        assert!((df - expected).abs() < 1e-9);
    }

    #[test]
    fn non_finite_is_a_fault() {
        let c = SimConfig::default();
        assert!(swing_step(f64::NAN, 0.0, &c).is_err());
        assert!(swing_step(0.0, f64::INFINITY, &c).is_err());
    }
}

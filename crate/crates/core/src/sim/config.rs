use serde::{Deserialize, Serialize};

/// Integration and swing-model settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt_s: f64,
    pub duration_s: f64,
    pub sample_every_s: f64,
    pub f_nom_hz: f64,
    pub s_base_mva: f64,
    pub inertia_h_s: f64,
    /// Load damping, per-unit power per per-unit frequency.
    pub damping_d_pu: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_s: 0.01,
            duration_s: 86_400.0,
            sample_every_s: 1.0,
            f_nom_hz: 50.0,
            s_base_mva: 15.0,
            inertia_h_s: 5.0,
            damping_d_pu: 1.0,
        }
    }
}

/// Relative slack when checking that one duration is a whole number of
/// another.
const MULTIPLE_TOLERANCE: f64 = 1e-9;

fn whole_multiple(total: f64, step: f64) -> Option<u64> {
    let n = (total / step).round();
    if n >= 0.0 && (n * step - total).abs() <= MULTIPLE_TOLERANCE * total.abs().max(step) {
        Some(n as u64)
    } else {
        None
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.dt_s,
            self.duration_s,
            self.sample_every_s,
            self.f_nom_hz,
            self.s_base_mva,
            self.inertia_h_s,
            self.damping_d_pu,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err("simulation settings must be finite".into());
        }
        if self.dt_s <= 0.0 {
            return Err("dt_s must be positive".into());
        }
        if self.duration_s < 0.0 {
            return Err("duration_s must be non-negative".into());
        }
        if whole_multiple(self.duration_s, self.dt_s).is_none() {
            return Err(format!(
                "duration_s = {} is not a whole multiple of dt_s = {}",
                self.duration_s, self.dt_s
            ));
        }
        if self.sample_every_s < self.dt_s {
            return Err("sample_every_s must be at least dt_s".into());
        }
        if whole_multiple(self.sample_every_s, self.dt_s).is_none() {
            return Err("sample_every_s must be a whole multiple of dt_s".into());
        }
        if whole_multiple(self.duration_s, self.sample_every_s).is_none() {
            return Err("duration_s must be a whole multiple of sample_every_s".into());
        }
        if self.f_nom_hz <= 0.0 || self.s_base_mva <= 0.0 || self.inertia_h_s <= 0.0 {
            return Err("f_nom_hz, s_base_mva and inertia_h_s must be positive".into());
        }
        if self.damping_d_pu < 0.0 {
            return Err("damping_d_pu must be non-negative".into());
        }
        Ok(())
    }

    /// Number of integration steps in the horizon.
    pub fn step_count(&self) -> u64 {
        whole_multiple(self.duration_s, self.dt_s).unwrap_or(0)
    }

    /// Integration steps between two trace samples.
    pub fn sample_stride(&self) -> u64 {
        whole_multiple(self.sample_every_s, self.dt_s).unwrap_or(1).max(1)
    }

    /// Samples in a complete trace, including `t = 0`.
    pub fn sample_count(&self) -> usize {
        (self.step_count() / self.sample_stride()) as usize + 1
    }

    /// Step index at which an event declared at `t_s` takes effect: the
    /// first grid point at or after `t_s`.
    pub fn step_index_at(&self, t_s: f64) -> u64 {
        let exact = t_s / self.dt_s;
        let nearest = exact.round();
        if (nearest - exact).abs() <= MULTIPLE_TOLERANCE * exact.abs().max(1.0) {
            nearest.max(0.0) as u64
        } else {
            exact.ceil().max(0.0) as u64
        }
    }

    /// Time of grid point `k`.
    pub fn time_at(&self, k: u64) -> f64 {
        k as f64 * self.dt_s
    }
}

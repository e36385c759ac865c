use serde::{Deserialize, Serialize};

use crate::control::Mode;

/// One recorded point of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t_s: f64,
    pub delta_f_hz: f64,
    pub p_diesel_mw: f64,
    pub p_pv_mw: f64,
    pub p_wind_mw: f64,
    /// Residential plus machine load.
    pub p_load_mw: f64,
    /// Fleet power, `+` = charging.
    pub p_ev_mw: f64,
    /// NaN for an empty fleet.
    pub mean_soc: f64,
    pub mode: Mode,
    /// Wind speed seen by the farm, including scenario overrides.
    pub wind_speed_m_s: f64,
    pub wind_online: bool,
    /// Lowest and highest single-vehicle state of charge; NaN if no fleet.
    pub soc_min: f64,
    pub soc_max: f64,
}

impl Sample {
    pub fn f_hz(&self, f_nom_hz: f64) -> f64 {
        f_nom_hz + self.delta_f_hz
    }
}

/// Decimated time series of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub f_nom_hz: f64,
    pub samples: Vec<Sample>,
}

impl SimTrace {
    pub fn new(f_nom_hz: f64) -> Self {
        SimTrace {
            f_nom_hz,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.f_hz(self.f_nom_hz))
    }
}

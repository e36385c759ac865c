//! Primary frequency controller driving the EV fleet.

pub mod fopid;
pub mod gl;
pub mod pfc;

pub use fopid::{fopid_output, ControllerState, FopidParams};
pub use gl::{gl_fractional_op, gl_weights, GlKernel};
pub use pfc::{apply_limiters, controller_step, dead_band_filter, select_mode, ControllerInput};

use serde::{Deserialize, Serialize};

/// Operating mode of the fleet chosen by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Charging,
    Regulation,
    Idle,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Charging => "charging",
            Mode::Regulation => "regulation",
            Mode::Idle => "idle",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "charging" => Some(Mode::Charging),
            "regulation" => Some(Mode::Regulation),
            "idle" => Some(Mode::Idle),
            _ => None,
        }
    }
}

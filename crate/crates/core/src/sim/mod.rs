//! Fixed-step engine: aggregate swing dynamics, component orchestration and
//! trace recording.

mod config;
mod engine;
mod swing;
mod trace;

pub use config::SimConfig;
pub use engine::{Microgrid, MicrogridState, Plant, RunOutcome, StepRecord};
pub use swing::swing_step;
pub use trace::{Sample, SimTrace};

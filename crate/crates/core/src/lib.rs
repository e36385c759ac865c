//! Deterministic 24-hour simulator of an industrial microgrid (diesel
//! genset, PV farm, wind farm, residential and motor loads) in which an EV
//! fleet under fractional-order PID primary control supports the grid
//! frequency through contingencies.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

pub mod config;
pub mod control;
pub mod error;
pub mod fleet;
pub mod io;
pub mod loads;
pub mod oracle;
pub mod profile;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod sources;

pub use config::{parse_config, parse_config_from, RunConfig};
pub use error::{ConfigError, OutputError, RunError, SimError};
pub use scalar::Scalar;
pub use scenario::{build_scenario, run_batch, run_scenario, summarize, CaseId, ScenarioId};
pub use sim::{swing_step, SimConfig, SimTrace};

pub type Simulator = sim::Microgrid<f64>;
pub type Plant = sim::Plant<f64>;
pub type FleetState = fleet::FleetState<f64>;
pub type ControllerState = control::ControllerState<f64>;
pub type FopidParams = control::FopidParams<f64>;
pub type PvFarm = sources::PvFarm<f64>;
pub type WindFarm = sources::WindFarm<f64>;
pub type DieselGen = sources::DieselGen<f64>;
pub type SolarCellParams = sources::SolarCellParams<f64>;

//! Generation models: diesel genset with a droop governor, PV farm and
//! wind farm.

pub mod diesel;
pub mod mppt;
pub mod pv;
pub mod solar;
pub mod wind;

pub use diesel::{governor_step, DieselGen};
pub use mppt::{inc_mppt_step, MpptState};
pub use pv::{pv_farm_power, PvFarm};
pub use solar::{solar_cell_current, SolarCellParams};
pub use wind::{wind_power, wind_trip_update, WindFarm};

//! Electric-vehicle fleet: per-vehicle state of charge, availability, and
//! the aggregate first-order power response.

mod aggregate;
mod roster;

pub use aggregate::{
    aggregate_response_step, allocate_and_update_soc, dispatchable_limits, se_percent, FleetLimits,
    FleetState, ALLOCATION_TOLERANCE_MW,
};
pub use roster::{build_fleet, load_roster, profile_template, EvUnit, FleetParams, ProfileTemplate};

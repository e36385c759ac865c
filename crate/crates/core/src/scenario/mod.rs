//! The three contingency scenarios, the three V2G cases, single runs and
//! the full batch.

mod runner;
mod spec;
mod summary;

pub use runner::{build_plant, build_simulator, run_batch, run_scenario, BatchRun};
pub use spec::{build_scenario, CaseId, Event, EventAction, ScenarioId, ScenarioParams, ScenarioSpec};
pub use summary::{summarize, BatchTable, ModeDuty, RunSummary, SummaryCell};

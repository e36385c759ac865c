use serde::{Deserialize, Serialize};

use crate::control::Mode;
use crate::error::SimError;
use crate::scenario::{CaseId, ScenarioId};
use crate::sim::SimTrace;

/// Share of samples spent in each controller mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeDuty {
    pub charging: f64,
    pub regulation: f64,
    pub idle: f64,
}

/// Frequency extrema and fleet statistics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub max_abs_dev_hz: f64,
    pub time_of_nadir_s: f64,
    pub mode_duty: ModeDuty,
    /// `None` for a run without vehicles.
    pub final_mean_soc: Option<f64>,
}

/// Exact extrema over the trace samples. The nadir time is the first
/// sample at the minimum.
pub fn summarize(trace: &SimTrace, f_nom_hz: f64) -> Result<RunSummary, SimError> {
    let first = trace
        .samples
        .first()
        .ok_or_else(|| SimError::Setup("cannot summarize an empty trace".into()))?;
    let mut f_min = f_nom_hz + first.delta_f_hz;
    let mut f_max = f_min;
    let mut t_nadir = first.t_s;
    let mut counts = [0usize; 3];
    for s in &trace.samples {
        let f = f_nom_hz + s.delta_f_hz;
        if f < f_min {
            f_min = f;
            t_nadir = s.t_s;
        }
        if f > f_max {
            f_max = f;
        }
        counts[match s.mode {
            Mode::Charging => 0,
            Mode::Regulation => 1,
            Mode::Idle => 2,
        }] += 1;
    }
    let n = trace.samples.len() as f64;
    let last = trace.samples[trace.samples.len() - 1];
    Ok(RunSummary {
        f_min_hz: f_min,
        f_max_hz: f_max,
        max_abs_dev_hz: (f_min - f_nom_hz).abs().max((f_max - f_nom_hz).abs()),
        time_of_nadir_s: t_nadir,
        mode_duty: ModeDuty {
            charging: counts[0] as f64 / n,
            regulation: counts[1] as f64 / n,
            idle: counts[2] as f64 / n,
        },
        final_mean_soc: last.mean_soc.is_finite().then_some(last.mean_soc),
    })
}

/// One cell of the scenario × case table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub scenario: ScenarioId,
    pub case: CaseId,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

/// Nine cells in (scenario, case) declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchTable {
    pub f_nom_hz: f64,
    pub cells: Vec<SummaryCell>,
}

impl BatchTable {
    pub fn get(&self, scenario: ScenarioId, case: CaseId) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| c.scenario == scenario && c.case == case)
    }

    pub fn summary(&self, scenario: ScenarioId, case: CaseId) -> Option<&RunSummary> {
        self.get(scenario, case).and_then(|c| c.summary.as_ref())
    }
}

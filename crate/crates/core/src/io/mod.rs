//! Trace CSV, batch summary and plot-script output.

mod plot;
mod summary;
mod trace_csv;

pub use plot::emit_plot_script;
pub use summary::{read_summary_json, render_summary_table, write_summary};
pub use trace_csv::{read_trace_csv, trace_to_csv, write_trace_csv, TRACE_HEADER};

use std::path::{Path, PathBuf};

use crate::error::OutputError;
use crate::scenario::{BatchRun, BatchTable, CaseId, ScenarioId};

/// Writes `bytes` to `path`, creating parent directories.
pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| OutputError::new(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| OutputError::new(path, e))
}

/// File name of the trace for one scenario/case pair.
pub fn trace_file_name(scenario: ScenarioId, case: CaseId) -> String {
    format!("trace_{}_{}.csv", scenario.as_str(), case.as_str())
}

/// Files written for a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchFiles {
    pub traces: Vec<PathBuf>,
    pub summary_json: PathBuf,
    pub summary_txt: PathBuf,
    pub plot_script: PathBuf,
}

/// Writes every available trace, the summary pair and the plot script
/// into `dir`.
pub fn write_batch(runs: &[BatchRun], table: &BatchTable, dir: &Path) -> Result<BatchFiles, OutputError> {
    let mut traces = Vec::new();
    let mut plotted = Vec::new();
    for r in runs {
        let path = dir.join(trace_file_name(r.scenario, r.case));
        if let Some(trace) = &r.trace {
            write_trace_csv(trace, &path)?;
            traces.push(path.clone());
        }
        plotted.push((r.scenario, r.case, path));
    }
    let (summary_json, summary_txt) = write_summary(table, dir)?;
    let plot_script = dir.join("plot_frequency.py");
    emit_plot_script(&plotted, &plot_script)?;
    Ok(BatchFiles {
        traces,
        summary_json,
        summary_txt,
        plot_script,
    })
}

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{ConfigError, OutputError};
use crate::io::write_file;
use crate::scenario::{BatchTable, CaseId, RunSummary, ScenarioId};

const LABEL_WIDTH: usize = 24;
const CELL_WIDTH: usize = 12;

/// Plain-text table: per scenario, rows of frequency extrema against the
/// three cases.
pub fn render_summary_table(table: &BatchTable) -> String {
    let mut out = String::new();
    type Row = (&'static str, fn(&RunSummary) -> f64);
    let rows: [Row; 3] = [
        ("Frequency Min (Hz)", |s| s.f_min_hz),
        ("Frequency Max (Hz)", |s| s.f_max_hz),
        ("Max |f - f_nom| (Hz)", |s| s.max_abs_dev_hz),
    ];
    for scenario in ScenarioId::ALL {
        let _ = writeln!(out, "{}", scenario.title());
        let _ = write!(out, "{:LABEL_WIDTH$}", "");
        for case in CaseId::ALL {
            let _ = write!(out, "{:>CELL_WIDTH$}", case.title());
        }
        out.push('\n');
        for (label, field) in rows {
            let _ = write!(out, "{label:LABEL_WIDTH$}");
            for case in CaseId::ALL {
                let cell = match table.summary(scenario, case) {
                    Some(s) => format!("{:.4}", field(s)),
                    None => "ERROR".to_string(),
                };
                let _ = write!(out, "{cell:>CELL_WIDTH$}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    let errors: Vec<_> = table.cells.iter().filter_map(|c| c.error.as_ref().map(|e| (c, e))).collect();
    if !errors.is_empty() {
        out.push_str("Errors\n");
        for (c, e) in errors {
            let _ = writeln!(out, "  {} / {}: {e}", c.scenario, c.case);
        }
    }
    out
}

/// Writes `summary.json` and `summary.txt` into `dir`.
pub fn write_summary(table: &BatchTable, dir: &Path) -> Result<(PathBuf, PathBuf), OutputError> {
    let json_path = dir.join("summary.json");
    let text_path = dir.join("summary.txt");
    let json = serde_json::to_string_pretty(table).map_err(|e| OutputError::new(&json_path, e.into()))?;
    write_file(&json_path, format!("{json}\n").as_bytes())?;
    write_file(&text_path, render_summary_table(table).as_bytes())?;
    Ok((json_path, text_path))
}

pub fn read_summary_json(path: &Path) -> Result<BatchTable, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| ConfigError::BadInputFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

use std::fmt::Write as _;
use std::path::Path;

use crate::control::Mode;
use crate::error::{ConfigError, OutputError};
use crate::io::write_file;
use crate::sim::{Sample, SimTrace};

pub const TRACE_HEADER: &str = "t_s,f_hz,p_diesel_mw,p_pv_mw,p_wind_mw,p_load_mw,p_ev_mw,mean_soc,mode";

/// Formats a trace as CSV: header, then one LF-terminated row per sample.
/// Frequency and powers carry nine decimals.
pub fn trace_to_csv(trace: &SimTrace) -> String {
    let mut out = String::with_capacity(96 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{}",
            s.t_s,
            s.f_hz(trace.f_nom_hz),
            s.p_diesel_mw,
            s.p_pv_mw,
            s.p_wind_mw,
            s.p_load_mw,
            s.p_ev_mw,
            s.mean_soc,
            s.mode.as_str()
        );
    }
    out
}

pub fn write_trace_csv(trace: &SimTrace, path: &Path) -> Result<(), OutputError> {
    write_file(path, trace_to_csv(trace).as_bytes())
}

/// Parses a file written by [`write_trace_csv`]. Columns absent from the
/// CSV (wind speed, per-vehicle extremes) come back as NaN.
pub fn read_trace_csv(path: &Path, f_nom_hz: f64) -> Result<SimTrace, ConfigError> {
    let bad = |reason: String| ConfigError::BadInputFile {
        path: path.display().to_string(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != TRACE_HEADER {
        return Err(bad(format!("unexpected header {}", header.join(","))));
    }
    let mut trace = SimTrace::new(f_nom_hz);
    for (n, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, ConfigError> {
            row[i]
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: bad number `{}`", n + 2, &row[i])))
        };
        let mode = Mode::parse(row[8].trim()).ok_or_else(|| bad(format!("row {}: bad mode `{}`", n + 2, &row[8])))?;
        trace.samples.push(Sample {
            t_s: num(0)?,
            delta_f_hz: num(1)? - f_nom_hz,
            p_diesel_mw: num(2)?,
            p_pv_mw: num(3)?,
            p_wind_mw: num(4)?,
            p_load_mw: num(5)?,
            p_ev_mw: num(6)?,
            mean_soc: num(7)?,
            mode,
            wind_speed_m_s: f64::NAN,
            wind_online: true,
            soc_min: f64::NAN,
            soc_max: f64::NAN,
        });
    }
    Ok(trace)
}

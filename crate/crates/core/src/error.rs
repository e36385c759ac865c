use thiserror::Error;

/// Faults raised while a run is in progress. Each carries enough context
/// to reproduce the failing step.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("non-finite value in {component} at t = {t_s} s: {detail}")]
    NonFinite {
        component: &'static str,
        t_s: f64,
        detail: String,
    },
    #[error("solar cell solver did not converge at v_pv = {v_pv} V after {iterations} iterations (residual {residual:e}, {params})")]
    SolverDiverged {
        v_pv: f64,
        iterations: usize,
        residual: f64,
        params: String,
    },
    #[error("fleet allocation residual {residual_mw:e} MW exceeds tolerance at t = {t_s} s")]
    AllocationResidual { residual_mw: f64, t_s: f64 },
    #[error("{component} fault at t = {t_s} s: {source}")]
    Component {
        component: &'static str,
        t_s: f64,
        #[source]
        source: Box<SimError>,
    },
    #[error("invalid simulation setup: {0}")]
    Setup(String),
}

impl SimError {
    pub(crate) fn non_finite(component: &'static str, t_s: f64, detail: impl Into<String>) -> Self {
        SimError::NonFinite {
            component,
            t_s,
            detail: detail.into(),
        }
    }

    /// Fills in the step time on a fault raised by a time-agnostic kernel.
    pub(crate) fn at_time(self, t: f64) -> Self {
        match self {
            SimError::NonFinite { component, t_s, detail } if t_s.is_nan() => SimError::NonFinite {
                component,
                t_s: t,
                detail,
            },
            other => other,
        }
    }

    /// Wraps an error raised inside a component with the component name and
    /// the step timestamp, unless it already carries them.
    pub(crate) fn in_component(self, component: &'static str, t_s: f64) -> Self {
        match self {
            e @ (SimError::NonFinite { .. }
            | SimError::AllocationResidual { .. }
            | SimError::Component { .. }) => e,
            other => SimError::Component {
                component,
                t_s,
                source: Box::new(other),
            },
        }
    }
}

/// Configuration problems. Every variant names the offending key path.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: malformed entry `{text}` (expected `key = value`)")]
    Malformed { line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("`{key}`: {reason}")]
    OutOfRange { key: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("{path}: {reason}")]
    BadInputFile { path: String, reason: String },
}

/// Output failures, always with the path that could not be written.
#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: String,
    #[source]
    pub source: std::io::Error,
}

impl OutputError {
    pub(crate) fn new(path: &std::path::Path, source: std::io::Error) -> Self {
        OutputError {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Any failure of a CLI invocation, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("simulation fault: {0}")]
    Sim(#[from] SimError),
    #[error("output error: {0}")]
    Output(#[from] OutputError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Sim(_) => 3,
            RunError::Output(_) => 4,
        }
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Contingency family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    PvDrop,
    WindTrip,
    AcmStart,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [ScenarioId::PvDrop, ScenarioId::WindTrip, ScenarioId::AcmStart];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::PvDrop => "pv-drop",
            ScenarioId::WindTrip => "wind-trip",
            ScenarioId::AcmStart => "acm-start",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ScenarioId::PvDrop => "Scenario 1: reduced PV generation",
            ScenarioId::WindTrip => "Scenario 2: wind farm trip",
            ScenarioId::AcmStart => "Scenario 3: asynchronous machine start",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "s1" | "pv-drop" | "pvdrop" | "pv_drop" => Ok(ScenarioId::PvDrop),
            "2" | "s2" | "wind-trip" | "windtrip" | "wind_trip" => Ok(ScenarioId::WindTrip),
            "3" | "s3" | "acm-start" | "acmstart" | "acm_start" => Ok(ScenarioId::AcmStart),
            _ => Err(ConfigError::BadValue {
                key: "run.scenario".into(),
                value: s.into(),
            }),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// V2G participation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseId {
    V2gOff,
    Ev100,
    Ev200,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::V2gOff, CaseId::Ev100, CaseId::Ev200];

    pub fn fleet_size(self) -> usize {
        match self {
            CaseId::V2gOff => 0,
            CaseId::Ev100 => 100,
            CaseId::Ev200 => 200,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::V2gOff => "v2g-off",
            CaseId::Ev100 => "ev100",
            CaseId::Ev200 => "ev200",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            CaseId::V2gOff => "V2G Off",
            CaseId::Ev100 => "100 EVs",
            CaseId::Ev200 => "200 EVs",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "off" | "v2g-off" | "v2goff" | "v2g_off" | "0" => Ok(CaseId::V2gOff),
            "2" | "100" | "ev100" | "ev-100" => Ok(CaseId::Ev100),
            "3" | "200" | "ev200" | "ev-200" => Ok(CaseId::Ev200),
            _ => Err(ConfigError::BadValue {
                key: "run.case".into(),
                value: s.into(),
            }),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Timing and severity of the three contingencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub pv_derate: f64,
    pub pv_derate_start_s: f64,
    pub pv_derate_end_s: f64,
    pub gust_start_s: f64,
    pub gust_duration_s: f64,
    pub gust_speed_m_s: f64,
    pub acm_start_s: f64,
    /// When false the scenario declares no events (baseline day).
    pub contingency_enabled: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            pv_derate: 0.2,
            pv_derate_start_s: 43_200.0,
            pv_derate_end_s: 43_500.0,
            gust_start_s: 79_200.0,
            gust_duration_s: 600.0,
            gust_speed_m_s: 16.0,
            acm_start_s: 43_200.0,
            contingency_enabled: true,
        }
    }
}

/// Scenario directive applied at a grid instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventAction {
    /// Sets the PV derate factor.
    PvDerate { factor: f64 },
    /// Replaces the profiled wind speed (`None` restores the profile).
    WindSpeed { m_s: Option<f64> },
    /// Switches on the asynchronous machine.
    AcmStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t_s: f64,
    pub action: EventAction,
}

/// A contingency script paired with a V2G case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub case_id: CaseId,
    /// In declaration order; simultaneous events apply in this order.
    pub events: Vec<Event>,
    pub fleet_size: usize,
    /// `key = value` patches applied on top of the run configuration.
    pub overrides: Vec<(String, String)>,
}

pub fn build_scenario(id: ScenarioId, case_id: CaseId, p: &ScenarioParams) -> ScenarioSpec {
    let events = if !p.contingency_enabled {
        Vec::new()
    } else {
        match id {
            ScenarioId::PvDrop => vec![
                Event {
                    t_s: p.pv_derate_start_s,
                    action: EventAction::PvDerate { factor: p.pv_derate },
                },
                Event {
                    t_s: p.pv_derate_end_s,
                    action: EventAction::PvDerate { factor: 1.0 },
                },
            ],
            ScenarioId::WindTrip => vec![
                Event {
                    t_s: p.gust_start_s,
                    action: EventAction::WindSpeed {
                        m_s: Some(p.gust_speed_m_s),
                    },
                },
                Event {
                    t_s: p.gust_start_s + p.gust_duration_s,
                    action: EventAction::WindSpeed { m_s: None },
                },
            ],
            ScenarioId::AcmStart => vec![Event {
                t_s: p.acm_start_s,
                action: EventAction::AcmStart,
            }],
        }
    };
    ScenarioSpec {
        id,
        case_id,
        events,
        fleet_size: case_id.fleet_size(),
        overrides: Vec::new(),
    }
}

impl ScenarioSpec {
    /// Checks event times against the horizon and that every event belongs
    /// to the scenario's own contingency family.
    pub fn validate(&self, duration_s: f64) -> Result<(), ConfigError> {
        for (k, e) in self.events.iter().enumerate() {
            if !(e.t_s >= 0.0 && e.t_s <= duration_s) {
                return Err(ConfigError::OutOfRange {
                    key: format!("scenario.events[{k}]"),
                    reason: format!("event time {} s outside [0, {duration_s}]", e.t_s),
                });
            }
            let family_ok = matches!(
                (self.id, e.action),
                (ScenarioId::PvDrop, EventAction::PvDerate { .. })
                    | (ScenarioId::WindTrip, EventAction::WindSpeed { .. })
                    | (ScenarioId::AcmStart, EventAction::AcmStart)
            );
            if !family_ok {
                return Err(ConfigError::OutOfRange {
                    key: format!("scenario.events[{k}]"),
                    reason: format!("{:?} does not belong to scenario {}", e.action, self.id),
                });
            }
            if let EventAction::PvDerate { factor } = e.action {
                if !(0.0..=1.0).contains(&factor) {
                    return Err(ConfigError::OutOfRange {
                        key: "scenario.pv_derate".into(),
                        reason: format!("derate {factor} outside [0, 1]"),
                    });
                }
            }
        }
        Ok(())
    }
}

//! Run configuration: every tunable of a run, with defaults, parsed from a
//! line-oriented `key = value` file with dotted keys and then patched by
//! command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::control::FopidParams;
use crate::error::ConfigError;
use crate::fleet::FleetParams;
use crate::scenario::{CaseId, ScenarioId, ScenarioParams};
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct DieselConfig {
    pub p_rated_mw: f64,
    pub droop_r_pu: f64,
    pub t_gov_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvConfig {
    pub p_rated_mw: f64,
    pub i_l_a: f64,
    pub i_o_a: f64,
    pub xi: f64,
    pub v_t_v: f64,
    pub r_s_ohm: f64,
    pub r_sh_ohm: f64,
    pub n_series: u32,
    pub mppt_step_v: f64,
    pub mppt_tolerance: f64,
    pub sunrise_s: f64,
    pub sunset_s: f64,
    pub peak_w_m2: f64,
    pub irradiance_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindConfig {
    pub p_rated_mw: f64,
    pub v_rated_m_s: f64,
    pub rho_kg_m3: f64,
    pub cp: f64,
    pub v_trip_m_s: f64,
    pub v_reconnect_m_s: f64,
    pub speed_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadConfig {
    pub p_nominal_mw: f64,
    pub power_factor: f64,
    pub profile_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcmConfig {
    pub s_rated_mva: f64,
    pub power_factor: f64,
    pub inrush_factor: f64,
    pub start_window_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetConfig {
    pub params: FleetParams,
    /// Replaces the case's fleet size when set.
    pub count: Option<usize>,
    pub seed: u64,
    pub roster_file: Option<PathBuf>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub scenario_id: ScenarioId,
    pub case_id: CaseId,
    pub scenario: ScenarioParams,
    pub diesel: DieselConfig,
    pub pv: PvConfig,
    pub wind: WindConfig,
    pub load: LoadConfig,
    pub acm: AcmConfig,
    pub fleet: FleetConfig,
    pub controller: FopidParams<f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sim: SimConfig::default(),
            scenario_id: ScenarioId::PvDrop,
            case_id: CaseId::V2gOff,
            scenario: ScenarioParams::default(),
            diesel: DieselConfig {
                p_rated_mw: 15.0,
                droop_r_pu: 0.05,
                t_gov_s: 0.5,
            },
            pv: PvConfig {
                p_rated_mw: 8.0,
                i_l_a: 8.0,
                i_o_a: 1e-10,
                xi: 1.3,
                v_t_v: 0.025_85,
                r_s_ohm: 0.005,
                r_sh_ohm: 1000.0,
                n_series: 1000,
                mppt_step_v: 1e-3,
                mppt_tolerance: 5e-3,
                sunrise_s: 25_000.0,
                sunset_s: 61_400.0,
                peak_w_m2: 1000.0,
                irradiance_file: None,
            },
            wind: WindConfig {
                p_rated_mw: 4.5,
                v_rated_m_s: 13.5,
                rho_kg_m3: 1.225,
                cp: 0.45,
                v_trip_m_s: 15.0,
                v_reconnect_m_s: 13.5,
                speed_file: None,
            },
            load: LoadConfig {
                p_nominal_mw: 10.0,
                power_factor: 0.95,
                profile_file: None,
            },
            acm: AcmConfig {
                s_rated_mva: 2.0,
                power_factor: 0.9,
                inrush_factor: 7.0,
                start_window_s: 10.0,
            },
            fleet: FleetConfig {
                params: FleetParams::default(),
                count: None,
                seed: 2024,
                roster_file: None,
            },
            controller: FopidParams::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Admissible values of a numeric key.
#[derive(Debug, Clone, Copy)]
enum Bound {
    Any,
    Positive,
    NonNegative,
    Closed(f64, f64),
    /// Open interval.
    Open(f64, f64),
}

impl Bound {
    fn check(self, x: f64) -> Result<(), String> {
        let ok = x.is_finite()
            && match self {
                Bound::Any => true,
                Bound::Positive => x > 0.0,
                Bound::NonNegative => x >= 0.0,
                Bound::Closed(lo, hi) => x >= lo && x <= hi,
                Bound::Open(lo, hi) => x > lo && x < hi,
            };
        if ok {
            return Ok(());
        }
        Err(match self {
            Bound::Any => format!("{x} is not finite"),
            Bound::Positive => format!("{x} must be positive"),
            Bound::NonNegative => format!("{x} must be non-negative"),
            Bound::Closed(lo, hi) => format!("{x} outside [{lo}, {hi}]"),
            Bound::Open(lo, hi) => format!("{x} outside ({lo}, {hi})"),
        })
    }
}

enum Slot<'a> {
    F64(&'a mut f64, Bound),
    Usize(&'a mut usize, usize),
    U32(&'a mut u32),
    U64(&'a mut u64),
    Bool(&'a mut bool),
    OptCount(&'a mut Option<usize>),
    OptPath(&'a mut Option<PathBuf>),
    Path(&'a mut PathBuf),
    Scenario(&'a mut ScenarioId),
    Case(&'a mut CaseId),
}

impl Slot<'_> {
    fn assign(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.into(),
            value: raw.into(),
        };
        let range = |reason: String| ConfigError::OutOfRange {
            key: key.into(),
            reason,
        };
        let v = raw.trim();
        match self {
            Slot::F64(x, bound) => {
                let parsed: f64 = v.parse().map_err(|_| bad())?;
                bound.check(parsed).map_err(range)?;
                **x = parsed;
            }
            Slot::Usize(x, min) => {
                let parsed: i64 = v.parse().map_err(|_| bad())?;
                if parsed < *min as i64 {
                    return Err(range(format!("{parsed} must be at least {min}")));
                }
                **x = parsed as usize;
            }
            Slot::U32(x) => {
                let parsed: i64 = v.parse().map_err(|_| bad())?;
                if parsed < 1 || parsed > i64::from(u32::MAX) {
                    return Err(range(format!("{parsed} must be a positive count")));
                }
                **x = parsed as u32;
            }
            Slot::U64(x) => **x = v.parse().map_err(|_| bad())?,
            Slot::Bool(x) => {
                **x = match v.to_ascii_lowercase().as_str() {
                    "true" | "yes" | "on" | "1" => true,
                    "false" | "no" | "off" | "0" => false,
                    _ => return Err(bad()),
                }
            }
            Slot::OptCount(x) => {
                **x = match v {
                    "" | "none" | "case" => None,
                    n => {
                        let parsed: i64 = n.parse().map_err(|_| bad())?;
                        if parsed < 0 {
                            return Err(range(format!("{parsed} must be non-negative")));
                        }
                        Some(parsed as usize)
                    }
                }
            }
            Slot::OptPath(x) => **x = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            Slot::Path(x) => **x = PathBuf::from(v),
            Slot::Scenario(x) => **x = ScenarioId::parse(v)?,
            Slot::Case(x) => **x = CaseId::parse(v)?,
        }
        Ok(())
    }

    fn render(&self) -> String {
        match self {
            Slot::F64(x, _) => format!("{x}"),
            Slot::Usize(x, _) => x.to_string(),
            Slot::U32(x) => x.to_string(),
            Slot::U64(x) => x.to_string(),
            Slot::Bool(x) => x.to_string(),
            Slot::OptCount(x) => x.map_or_else(String::new, |n| n.to_string()),
            Slot::OptPath(x) => x.as_ref().map_or_else(String::new, |p| p.display().to_string()),
            Slot::Path(x) => x.display().to_string(),
            Slot::Scenario(x) => x.to_string(),
            Slot::Case(x) => x.to_string(),
        }
    }

    fn recheck(&self, key: &str) -> Result<(), ConfigError> {
        if let Slot::F64(x, bound) = self {
            bound.check(**x).map_err(|reason| ConfigError::OutOfRange {
                key: key.into(),
                reason,
            })?;
        }
        Ok(())
    }
}

impl RunConfig {
    fn slots(&mut self) -> Vec<(&'static str, Slot<'_>)> {
        use Bound::*;
        use Slot::*;
        let c = &mut self.controller;
        let f = &mut self.fleet;
        let fp = &mut f.params;
        vec![
            ("run.scenario", Scenario(&mut self.scenario_id)),
            ("run.case", Case(&mut self.case_id)),
            ("run.output_dir", Path(&mut self.output_dir)),
            ("sim.dt_s", F64(&mut self.sim.dt_s, Positive)),
            ("sim.duration_s", F64(&mut self.sim.duration_s, NonNegative)),
            ("sim.sample_every_s", F64(&mut self.sim.sample_every_s, Positive)),
            ("sim.f_nom_hz", F64(&mut self.sim.f_nom_hz, Positive)),
            ("sim.s_base_mva", F64(&mut self.sim.s_base_mva, Positive)),
            ("sim.inertia_h_s", F64(&mut self.sim.inertia_h_s, Positive)),
            ("sim.damping_d_pu", F64(&mut self.sim.damping_d_pu, NonNegative)),
            ("scenario.pv_derate", F64(&mut self.scenario.pv_derate, Closed(0.0, 1.0))),
            ("scenario.pv_derate_start_s", F64(&mut self.scenario.pv_derate_start_s, NonNegative)),
            ("scenario.pv_derate_end_s", F64(&mut self.scenario.pv_derate_end_s, NonNegative)),
            ("scenario.gust_start_s", F64(&mut self.scenario.gust_start_s, NonNegative)),
            ("scenario.gust_duration_s", F64(&mut self.scenario.gust_duration_s, NonNegative)),
            ("scenario.gust_speed_m_s", F64(&mut self.scenario.gust_speed_m_s, NonNegative)),
            ("scenario.acm_start_s", F64(&mut self.scenario.acm_start_s, NonNegative)),
            ("scenario.contingency_enabled", Bool(&mut self.scenario.contingency_enabled)),
            ("diesel.p_rated_mw", F64(&mut self.diesel.p_rated_mw, Positive)),
            ("diesel.droop_r_pu", F64(&mut self.diesel.droop_r_pu, Positive)),
            ("diesel.t_gov_s", F64(&mut self.diesel.t_gov_s, Positive)),
            ("pv.p_rated_mw", F64(&mut self.pv.p_rated_mw, Positive)),
            ("pv.i_l_a", F64(&mut self.pv.i_l_a, Positive)),
            ("pv.i_o_a", F64(&mut self.pv.i_o_a, Positive)),
            ("pv.xi", F64(&mut self.pv.xi, Closed(1.0, 2.0))),
            ("pv.v_t_v", F64(&mut self.pv.v_t_v, Positive)),
            ("pv.r_s_ohm", F64(&mut self.pv.r_s_ohm, NonNegative)),
            ("pv.r_sh_ohm", F64(&mut self.pv.r_sh_ohm, Positive)),
            ("pv.n_series", U32(&mut self.pv.n_series)),
            ("pv.mppt_step_v", F64(&mut self.pv.mppt_step_v, Positive)),
            ("pv.mppt_tolerance", F64(&mut self.pv.mppt_tolerance, Positive)),
            ("pv.sunrise_s", F64(&mut self.pv.sunrise_s, Closed(0.0, 86_400.0))),
            ("pv.sunset_s", F64(&mut self.pv.sunset_s, Closed(0.0, 86_400.0))),
            ("pv.peak_w_m2", F64(&mut self.pv.peak_w_m2, NonNegative)),
            ("pv.irradiance_file", OptPath(&mut self.pv.irradiance_file)),
            ("wind.p_rated_mw", F64(&mut self.wind.p_rated_mw, Positive)),
            ("wind.v_rated_m_s", F64(&mut self.wind.v_rated_m_s, Positive)),
            ("wind.rho_kg_m3", F64(&mut self.wind.rho_kg_m3, Positive)),
            ("wind.cp", F64(&mut self.wind.cp, Closed(0.0, 0.593))),
            ("wind.v_trip_m_s", F64(&mut self.wind.v_trip_m_s, Positive)),
            ("wind.v_reconnect_m_s", F64(&mut self.wind.v_reconnect_m_s, Positive)),
            ("wind.speed_file", OptPath(&mut self.wind.speed_file)),
            ("load.p_nominal_mw", F64(&mut self.load.p_nominal_mw, NonNegative)),
            ("load.power_factor", F64(&mut self.load.power_factor, Closed(0.0, 1.0))),
            ("load.profile_file", OptPath(&mut self.load.profile_file)),
            ("acm.s_rated_mva", F64(&mut self.acm.s_rated_mva, NonNegative)),
            ("acm.power_factor", F64(&mut self.acm.power_factor, Closed(0.0, 1.0))),
            ("acm.inrush_factor", F64(&mut self.acm.inrush_factor, Closed(6.0, 8.0))),
            ("acm.start_window_s", F64(&mut self.acm.start_window_s, NonNegative)),
            ("fleet.count", OptCount(&mut f.count)),
            ("fleet.seed", U64(&mut f.seed)),
            ("fleet.roster_file", OptPath(&mut f.roster_file)),
            ("fleet.p_cap_mw", F64(&mut fp.p_cap_mw, NonNegative)),
            ("fleet.cap_scales_with_fleet", Bool(&mut fp.cap_scales_with_fleet)),
            ("fleet.k_ev", F64(&mut fp.k_ev, Positive)),
            ("fleet.t_ev_s", F64(&mut fp.t_ev_s, Positive)),
            ("fleet.capacity_kwh", F64(&mut fp.capacity_kwh, Positive)),
            ("fleet.charger_kw", F64(&mut fp.charger_kw, NonNegative)),
            ("fleet.efficiency", F64(&mut fp.efficiency, Open(0.0, 1.0 + 1e-12))),
            ("fleet.soc_min", F64(&mut fp.soc_min, Closed(0.0, 1.0))),
            ("fleet.soc_max", F64(&mut fp.soc_max, Closed(0.0, 1.0))),
            ("fleet.soc_jitter", F64(&mut fp.soc_jitter, Closed(0.0, 0.5))),
            ("fleet.plug_jitter_s", F64(&mut fp.plug_jitter_s, Closed(0.0, 43_200.0))),
            ("controller.kp", F64(&mut c.kp, Any)),
            ("controller.ki", F64(&mut c.ki, Any)),
            ("controller.kd", F64(&mut c.kd, Any)),
            ("controller.lambda", F64(&mut c.lambda, Open(0.0, 2.0))),
            ("controller.mu", F64(&mut c.mu, Open(0.0, 2.0))),
            ("controller.memory_len", Usize(&mut c.memory_len, 1)),
            ("controller.g1", F64(&mut c.g1, Any)),
            ("controller.k1", F64(&mut c.k1, Positive)),
            ("controller.k2_threshold", F64(&mut c.k2_threshold, NonNegative)),
            ("controller.dead_band_pu", F64(&mut c.dead_band_pu, NonNegative)),
            ("controller.dead_band_offset", Bool(&mut c.dead_band_offset)),
            ("controller.error_gain_per_hz", F64(&mut c.error_gain_per_hz, Any)),
            ("controller.output_gain_mw", F64(&mut c.output_gain_mw, NonNegative)),
            ("controller.rate_limit_mw_per_s", F64(&mut c.rate_limit_mw_per_s, Positive)),
            ("controller.balance_band_mw", F64(&mut c.balance_band_mw, NonNegative)),
        ]
    }

    /// All recognised keys.
    pub fn keys() -> Vec<&'static str> {
        RunConfig::default().slots().into_iter().map(|(k, _)| k).collect()
    }

    /// Assigns one key, checking its range.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        let mut slots = self.slots();
        let (_, slot) = slots
            .iter_mut()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey(key.into()))?;
        slot.assign(key, value)
    }

    /// Applies every `key = value` line of `text`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line: n + 1,
                text: line.into(),
            })?;
            if k.trim().is_empty() {
                return Err(ConfigError::Malformed {
                    line: n + 1,
                    text: line.into(),
                });
            }
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Resolved configuration as a config file that parses back to `self`.
    pub fn render(&self) -> String {
        let mut copy = self.clone();
        let mut out = String::new();
        for (k, slot) in copy.slots() {
            let _ = writeln!(out, "{k} = {}", slot.render());
        }
        out
    }

    /// Range and consistency checks across keys.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut copy = self.clone();
        for (k, slot) in copy.slots() {
            slot.recheck(k)?;
        }
        let range = |key: &str, reason: String| ConfigError::OutOfRange {
            key: key.into(),
            reason,
        };
        self.sim.validate().map_err(|r| range("sim", r))?;
        let fp = &self.fleet.params;
        if fp.soc_min >= fp.soc_max {
            return Err(range("fleet.soc_min", "must be below fleet.soc_max".into()));
        }
        if self.wind.v_reconnect_m_s > self.wind.v_trip_m_s {
            return Err(range("wind.v_reconnect_m_s", "must not exceed wind.v_trip_m_s".into()));
        }
        if self.pv.sunrise_s >= self.pv.sunset_s {
            return Err(range("pv.sunrise_s", "must precede pv.sunset_s".into()));
        }
        if self.scenario.pv_derate_end_s < self.scenario.pv_derate_start_s {
            return Err(range("scenario.pv_derate_end_s", "must not precede the derate start".into()));
        }
        self.controller.validate().map_err(|r| range("controller", r))?;
        Ok(())
    }
}

/// Builds a configuration from an optional file and `key=value` flag
/// overrides (applied after the file), then validates it.
pub fn parse_config(file: Option<&Path>, flags: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    parse_config_from(RunConfig::default(), file, flags)
}

/// As [`parse_config`], starting from `base` instead of the defaults.
pub fn parse_config_from(
    base: RunConfig,
    file: Option<&Path>,
    flags: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut cfg = base;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        cfg.apply_text(&text)?;
    }
    for (k, v) in flags {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Splits a `key=value` flag argument.
pub fn parse_assignment(s: &str) -> Result<(String, String), ConfigError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| ConfigError::Malformed {
            line: 0,
            text: s.into(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("").unwrap();
        c.validate().unwrap();
        assert_eq!(c.sim.f_nom_hz, 50.0);
        assert_eq!(c.fleet.params.p_cap_mw, 4.0);
        assert_eq!((c.fleet.params.soc_min, c.fleet.params.soc_max), (0.2, 0.8));
    }

    #[test]
    fn flag_overrides_one_key() {
        let c = parse_config(None, &[("controller.kp".into(), "2.5".into())]).unwrap();
        assert_eq!(c.controller.kp, 2.5);
        let mut d = RunConfig::default();
        d.controller.kp = 2.5;
        assert_eq!(c, d);
    }

    #[test]
    fn negative_dead_band_names_key() {
        let err = parse_config(None, &[("controller.dead_band_pu".into(), "-1".into())]).unwrap_err();
        match err {
            ConfigError::OutOfRange { key, .. } => assert_eq!(key, "controller.dead_band_pu"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_malformed() {
        let mut c = RunConfig::default();
        assert_eq!(
            c.apply_text("controller.kq = 1"),
            Err(ConfigError::UnknownKey("controller.kq".into()))
        );
        assert!(matches!(c.apply_text("\n\njust words"), Err(ConfigError::Malformed { line: 3, .. })));
        assert!(matches!(c.set("sim.dt_s", "fast"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn comments_and_spacing() {
        let mut c = RunConfig::default();
        c.apply_text("# tuning\nsim.inertia_h_s=4 # lighter\n  run.case =  ev200\n").unwrap();
        assert_eq!(c.sim.inertia_h_s, 4.0);
        assert_eq!(c.case_id, CaseId::Ev200);
    }

    #[test]
    fn render_round_trips() {
        let mut c = RunConfig::default();
        c.set("controller.lambda", "0.9").unwrap();
        c.set("fleet.count", "37").unwrap();
        c.set("pv.irradiance_file", "sun.csv").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.render()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn cross_key_checks() {
        let r = parse_config(None, &[("fleet.soc_min".into(), "0.9".into())]);
        assert!(matches!(r, Err(ConfigError::OutOfRange { key, .. }) if key == "fleet.soc_min"));
        let r = parse_config(None, &[("sim.duration_s".into(), "10.005".into())]);
        assert!(matches!(r, Err(ConfigError::OutOfRange { key, .. }) if key == "sim"));
    }
}

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::fleet::FleetState;
use crate::profile::DAY_S;
use crate::scalar::{lit, Scalar};

/// One vehicle behind one bidirectional charger.
#[derive(Debug, Clone, PartialEq)]
pub struct EvUnit<T> {
    pub profile_id: u8,
    pub soc: T,
    pub capacity_kwh: T,
    pub p_charger_kw: T,
    /// `[plug_in, plug_out)` intervals in seconds of day.
    pub plug_schedule: Vec<(f64, f64)>,
}

/// Seconds since the most recent midnight.
pub(crate) fn time_of_day(t_s: f64) -> f64 {
    if (0.0..DAY_S).contains(&t_s) {
        t_s
    } else {
        t_s.rem_euclid(DAY_S)
    }
}

impl<T: Scalar> EvUnit<T> {
    pub fn plugged(&self, t_s: f64) -> bool {
        self.plugged_at_tod(time_of_day(t_s))
    }

    pub(crate) fn plugged_at_tod(&self, tod: f64) -> bool {
        self.plug_schedule.iter().any(|&(a, b)| tod >= a && tod < b)
    }
}

/// Fleet-wide parameters shared by every vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetParams {
    pub p_cap_mw: f64,
    /// Scale the aggregate cap with fleet size (cap per 100 vehicles).
    pub cap_scales_with_fleet: bool,
    pub k_ev: f64,
    pub t_ev_s: f64,
    pub capacity_kwh: f64,
    pub charger_kw: f64,
    pub efficiency: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    /// Half-width of the uniform jitter applied to template initial SOC.
    pub soc_jitter: f64,
    /// Half-width of the uniform jitter applied to plug times, seconds.
    pub plug_jitter_s: f64,
}

impl Default for FleetParams {
    fn default() -> Self {
        FleetParams {
            p_cap_mw: 4.0,
            cap_scales_with_fleet: false,
            k_ev: 0.333,
            t_ev_s: 1.0,
            capacity_kwh: 40.0,
            charger_kw: 10.0,
            efficiency: 1.0,
            soc_min: 0.2,
            soc_max: 0.8,
            soc_jitter: 0.05,
            plug_jitter_s: 900.0,
        }
    }
}

/// Availability pattern and starting charge of one of the five car profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileTemplate {
    pub id: u8,
    pub name: &'static str,
    pub intervals: &'static [(f64, f64)],
    pub initial_soc: f64,
}

const H: f64 = 3600.0;

const TEMPLATES: [ProfileTemplate; 5] = [
    ProfileTemplate {
        id: 1,
        name: "overnight",
        intervals: &[(0.0, 7.0 * H), (20.0 * H, 24.0 * H)],
        initial_soc: 0.3,
    },
    ProfileTemplate {
        id: 2,
        name: "morning-commute",
        intervals: &[(8.0 * H, 14.0 * H), (21.0 * H, 24.0 * H)],
        initial_soc: 0.4,
    },
    ProfileTemplate {
        id: 3,
        name: "workplace-day",
        intervals: &[(9.0 * H, 17.0 * H)],
        initial_soc: 0.5,
    },
    ProfileTemplate {
        id: 4,
        name: "evening",
        intervals: &[(0.0, 6.0 * H), (18.0 * H, 24.0 * H)],
        initial_soc: 0.6,
    },
    ProfileTemplate {
        id: 5,
        name: "always-plugged",
        intervals: &[(0.0, 24.0 * H)],
        initial_soc: 0.7,
    },
];

pub fn profile_template(id: u8) -> Option<&'static ProfileTemplate> {
    TEMPLATES.iter().find(|t| t.id == id)
}

/// Per-vehicle stream, keyed so that vehicle `k` of a profile is identical
/// whatever the fleet size.
fn unit_rng(seed: u64, profile_id: u8, index: usize) -> ChaCha8Rng {
    let key = seed
        ^ (u64::from(profile_id)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (index as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    ChaCha8Rng::seed_from_u64(key)
}

fn jitter_boundary(rng: &mut ChaCha8Rng, t: f64, half_width: f64) -> f64 {
    // Midnight boundaries stay put so overnight windows wrap cleanly.
    if t <= 0.0 || t >= DAY_S || half_width <= 0.0 {
        return t;
    }
    (t + rng.gen_range(-half_width..=half_width)).clamp(0.0, DAY_S)
}

/// Builds `n_evs` vehicles spread evenly over the five profiles (the
/// remainder going to the lowest profile ids). Deterministic in `seed`.
pub fn build_fleet<T: Scalar>(n_evs: usize, seed: u64, params: &FleetParams) -> FleetState<T> {
    let base = n_evs / TEMPLATES.len();
    let extra = n_evs % TEMPLATES.len();
    let mut units = Vec::with_capacity(n_evs);
    for (p, template) in TEMPLATES.iter().enumerate() {
        let count = base + usize::from(p < extra);
        for k in 0..count {
            let mut rng = unit_rng(seed, template.id, k);
            let soc_lo = params.soc_min + 1e-3;
            let soc_hi = params.soc_max - 1e-3;
            let soc = if params.soc_jitter > 0.0 {
                template.initial_soc + rng.gen_range(-params.soc_jitter..=params.soc_jitter)
            } else {
                template.initial_soc
            };
            let plug_schedule = template
                .intervals
                .iter()
                .map(|&(a, b)| {
                    let a = jitter_boundary(&mut rng, a, params.plug_jitter_s);
                    let b = jitter_boundary(&mut rng, b, params.plug_jitter_s);
                    (a, b.max(a))
                })
                .collect();
            units.push(EvUnit {
                profile_id: template.id,
                soc: lit(soc.clamp(soc_lo, soc_hi)),
                capacity_kwh: lit(params.capacity_kwh),
                p_charger_kw: lit(params.charger_kw),
                plug_schedule,
            });
        }
    }
    FleetState::new(units, params)
}

/// Reads a roster CSV with header
/// `profile_id,capacity_kwh,charger_kw,initial_soc,plug_intervals`, where
/// `plug_intervals` is a `;`-separated list of `start-end` seconds of day.
pub fn load_roster<T: Scalar>(path: &Path, params: &FleetParams) -> Result<FleetState<T>, ConfigError> {
    let bad = |reason: String| ConfigError::BadInputFile {
        path: path.display().to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
    let mut units = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 5 {
            return Err(bad(format!("line {line}: expected 5 columns, found {}", record.len())));
        }
        let num = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("line {line}: cannot parse `{}`", &record[i])))
        };
        let profile_id = record[0]
            .parse::<u8>()
            .ok()
            .filter(|id| (1..=5).contains(id))
            .ok_or_else(|| bad(format!("line {line}: profile_id must be 1-5")))?;
        let (capacity, charger, soc) = (num(1)?, num(2)?, num(3)?);
        if capacity <= 0.0 || charger < 0.0 {
            return Err(bad(format!("line {line}: capacity must be > 0 and charger >= 0")));
        }
        if !(params.soc_min..=params.soc_max).contains(&soc) {
            return Err(bad(format!(
                "line {line}: initial_soc {soc} outside [{}, {}]",
                params.soc_min, params.soc_max
            )));
        }
        let mut plug_schedule = Vec::new();
        for part in record[4].split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = part
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
                .ok_or_else(|| bad(format!("line {line}: bad plug interval `{part}`")))?;
            if !(0.0..=DAY_S).contains(&a) || !(a..=DAY_S).contains(&b) {
                return Err(bad(format!("line {line}: plug interval `{part}` outside the day")));
            }
            plug_schedule.push((a, b));
        }
        units.push(EvUnit {
            profile_id,
            soc: lit(soc),
            capacity_kwh: lit(capacity),
            p_charger_kw: lit(charger),
            plug_schedule,
        });
    }
    Ok(FleetState::new(units, params))
}

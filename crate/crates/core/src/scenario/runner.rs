use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{ConfigError, RunError, SimError};
use crate::fleet::{build_fleet, load_roster, FleetState};
use crate::loads::{AsyncMachine, ResidentialLoad};
use crate::profile::{default_irradiance, default_load_multiplier, default_wind_speed, Profile};
use crate::scalar::{lit, Scalar};
use crate::scenario::{build_scenario, summarize, BatchTable, CaseId, ScenarioId, ScenarioSpec, SummaryCell};
use crate::sim::{Microgrid, Plant, RunOutcome, SimTrace};
use crate::sources::{DieselGen, PvFarm, SolarCellParams, WindFarm};

fn profile_or<T: Scalar>(
    file: Option<&std::path::Path>,
    default: impl FnOnce() -> Profile<T>,
) -> Result<Profile<T>, ConfigError> {
    match file {
        Some(path) => Profile::from_csv(path),
        None => Ok(default()),
    }
}

/// Instantiates every component of the scenario under `cfg`.
pub fn build_plant<T: Scalar>(cfg: &RunConfig, spec: &ScenarioSpec) -> Result<Plant<T>, RunError> {
    let range = |key: &str, reason: String| ConfigError::OutOfRange {
        key: key.into(),
        reason,
    };
    let d = &cfg.diesel;
    let diesel = DieselGen::new(lit(d.p_rated_mw), lit(d.droop_r_pu), lit(d.t_gov_s), lit(cfg.sim.f_nom_hz));

    let pv = &cfg.pv;
    let irradiance = profile_or(pv.irradiance_file.as_deref(), || {
        default_irradiance(pv.sunrise_s, pv.sunset_s, pv.peak_w_m2)
    })?;
    let cell = SolarCellParams {
        i_l_a: lit(pv.i_l_a),
        i_o_a: lit(pv.i_o_a),
        xi: lit(pv.xi),
        v_t_v: lit(pv.v_t_v),
        r_s_ohm: lit(pv.r_s_ohm),
        r_sh_ohm: lit(pv.r_sh_ohm),
        n_series: pv.n_series,
        n_parallel: 1,
    };
    let pv_farm = PvFarm::sized(
        lit(pv.p_rated_mw),
        cell,
        irradiance,
        lit(pv.mppt_step_v),
        lit(pv.mppt_tolerance),
    )
    .map_err(|e| e.in_component("pv", 0.0))?;

    let w = &cfg.wind;
    let wind_profile = profile_or(w.speed_file.as_deref(), default_wind_speed)?;
    if wind_profile.min_value() < T::zero() {
        return Err(range("wind.speed_file", "wind speed must be non-negative".into()).into());
    }
    let wind = WindFarm::rated_at(
        lit(w.p_rated_mw),
        lit(w.v_rated_m_s),
        lit(w.rho_kg_m3),
        lit(w.cp),
        lit(w.v_trip_m_s),
        lit(w.v_reconnect_m_s),
        wind_profile,
    );

    let residential = ResidentialLoad {
        p_nominal_mw: lit(cfg.load.p_nominal_mw),
        power_factor: lit(cfg.load.power_factor),
        profile: profile_or(cfg.load.profile_file.as_deref(), default_load_multiplier)?,
    };
    residential.validate().map_err(|r| range("load.profile_file", r))?;

    let a = &cfg.acm;
    let acm = AsyncMachine::new(lit(a.s_rated_mva), lit(a.power_factor), lit(a.inrush_factor), a.start_window_s);
    acm.validate().map_err(|r| range("acm", r))?;

    let n_evs = cfg.fleet.count.unwrap_or(spec.fleet_size);
    let fleet = match (&cfg.fleet.roster_file, n_evs) {
        (_, 0) => FleetState::new(Vec::new(), &cfg.fleet.params),
        (Some(path), _) => load_roster(path, &cfg.fleet.params)?,
        (None, n) => build_fleet(n, cfg.fleet.seed, &cfg.fleet.params),
    };

    Ok(Plant {
        diesel,
        pv: pv_farm,
        wind,
        residential,
        acm,
        fleet,
    })
}

/// Applies the scenario's overrides to `cfg` and builds a ready-to-run engine.
pub fn build_simulator<T: Scalar>(cfg: &RunConfig, spec: &ScenarioSpec) -> Result<Microgrid<T>, RunError> {
    let mut cfg = cfg.clone();
    for (k, v) in &spec.overrides {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    spec.validate(cfg.sim.duration_s)?;
    let plant = build_plant::<T>(&cfg, spec)?;
    let c = &cfg.controller;
    let params = crate::control::FopidParams {
        kp: lit(c.kp),
        ki: lit(c.ki),
        kd: lit(c.kd),
        lambda: lit(c.lambda),
        mu: lit(c.mu),
        memory_len: c.memory_len,
        g1: lit(c.g1),
        k1: lit(c.k1),
        k2_threshold: lit(c.k2_threshold),
        dead_band_pu: lit(c.dead_band_pu),
        dead_band_offset: c.dead_band_offset,
        error_gain_per_hz: lit(c.error_gain_per_hz),
        output_gain_mw: lit(c.output_gain_mw),
        rate_limit_mw_per_s: lit(c.rate_limit_mw_per_s),
        balance_band_mw: lit(c.balance_band_mw),
    };
    Ok(Microgrid::new(cfg.sim.clone(), plant, params, &spec.events)?)
}

/// Runs one scenario/case. A fault during the run is reported inside the
/// outcome next to the partial trace; setup problems are errors.
pub fn run_scenario<T: Scalar>(cfg: &RunConfig, spec: &ScenarioSpec) -> Result<RunOutcome, RunError> {
    let mut sim = build_simulator::<T>(cfg, spec)?;
    Ok(sim.run())
}

/// One run of the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRun {
    pub scenario: ScenarioId,
    pub case: CaseId,
    /// Full or partial trace; `None` when the run could not be set up.
    pub trace: Option<SimTrace>,
    pub error: Option<String>,
}

/// Runs all nine scenario/case combinations in parallel and returns them
/// in (scenario, case) declaration order together with their summary table.
pub fn run_batch<T: Scalar>(cfg: &RunConfig) -> (Vec<BatchRun>, BatchTable) {
    let jobs: Vec<(ScenarioId, CaseId)> = ScenarioId::ALL
        .iter()
        .flat_map(|&s| CaseId::ALL.iter().map(move |&c| (s, c)))
        .collect();
    let runs: Vec<BatchRun> = jobs
        .par_iter()
        .map(|&(scenario, case)| {
            let spec = build_scenario(scenario, case, &cfg.scenario);
            match run_scenario::<T>(cfg, &spec) {
                Ok(RunOutcome { trace, fault }) => BatchRun {
                    scenario,
                    case,
                    trace: Some(trace),
                    error: fault.map(|e| e.to_string()),
                },
                Err(e) => BatchRun {
                    scenario,
                    case,
                    trace: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let cells = runs
        .iter()
        .map(|r| {
            let (summary, error) = match (&r.error, &r.trace) {
                (Some(e), _) => (None, Some(e.clone())),
                (None, Some(t)) => match summarize(t, cfg.sim.f_nom_hz) {
                    Ok(s) => (Some(s), None),
                    Err(e) => (None, Some(e.to_string())),
                },
                (None, None) => (None, Some(SimError::Setup("no trace".into()).to_string())),
            };
            SummaryCell {
                scenario: r.scenario,
                case: r.case,
                summary,
                error,
            }
        })
        .collect();
    let table = BatchTable {
        f_nom_hz: cfg.sim.f_nom_hz,
        cells,
    };
    (runs, table)
}

use crate::control::{controller_step, ControllerInput, ControllerState, FopidParams, Mode};
use crate::error::SimError;
use crate::fleet::{se_percent, FleetState};
use crate::loads::{acm_power, residential_power, AsyncMachine, ResidentialLoad};
use crate::scalar::{lit, Scalar};
use crate::scenario::{Event, EventAction};
use crate::sim::{swing_step, Sample, SimConfig, SimTrace};
use crate::sources::{governor_step, pv_farm_power, wind_power, DieselGen, PvFarm, WindFarm};

/// Grid-level state at one instant: the frequency deviation and every
/// power injection evaluated at that instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrogridState<T> {
    pub t_s: f64,
    pub delta_f_hz: T,
    pub p_diesel_mw: T,
    pub p_pv_mw: T,
    pub p_wind_mw: T,
    /// Residential plus machine load.
    pub p_load_mw: T,
    /// Fleet power, `+` = charging.
    pub p_ev_mw: T,
}

impl<T: Scalar> MicrogridState<T> {
    /// Generation minus demand, MW.
    pub fn imbalance_mw(&self) -> T {
        self.p_diesel_mw + self.p_pv_mw + self.p_wind_mw - self.p_load_mw - self.p_ev_mw
    }
}

/// What one [`Microgrid::step`] fed into the swing equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    pub t_start_s: f64,
    pub delta_f_before_hz: T,
    pub p_imbalance_mw: T,
    pub delta_f_after_hz: T,
}

/// Every component of the microgrid.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant<T> {
    pub diesel: DieselGen<T>,
    pub pv: PvFarm<T>,
    pub wind: WindFarm<T>,
    pub residential: ResidentialLoad<T>,
    pub acm: AsyncMachine<T>,
    pub fleet: FleetState<T>,
}

/// Result of a run: the trace up to the last completed sample and the
/// fault that stopped it early, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: SimTrace,
    pub fault: Option<SimError>,
}

/// Fixed-step simulator.
///
/// The state at grid point `k` holds the deviation and the component
/// powers evaluated there. One step takes the imbalance of that state
/// through the swing equation, advances the clock, applies the events
/// due at the new grid point, updates sources and loads (diesel governor,
/// wind, PV, residential load, machine) and finally runs the controller
/// and the fleet. Every component is touched exactly once per step in
/// that order.
#[derive(Debug, Clone)]
pub struct Microgrid<T> {
    cfg: SimConfig,
    plant: Plant<T>,
    controller: ControllerState<T>,
    controller_params: FopidParams<T>,
    state: MicrogridState<T>,
    step_index: u64,
    step_count: u64,
    events: Vec<(u64, EventAction)>,
    next_event: usize,
    wind_override: Option<T>,
    wind_speed: T,
    last_step: Option<StepRecord<T>>,
}

fn finite<T: Scalar>(component: &'static str, name: &str, x: T, t_s: f64) -> Result<T, SimError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(SimError::non_finite(component, t_s, format!("{name} = {x}")))
    }
}

impl<T: Scalar> Microgrid<T> {
    /// Builds the engine and settles the diesel on the initial net demand
    /// so the run starts balanced.
    pub fn new(
        cfg: SimConfig,
        plant: Plant<T>,
        controller_params: FopidParams<T>,
        events: &[Event],
    ) -> Result<Self, SimError> {
        cfg.validate().map_err(SimError::Setup)?;
        controller_params.validate().map_err(SimError::Setup)?;
        let mut scheduled: Vec<(u64, EventAction)> = events.iter().map(|e| (cfg.step_index_at(e.t_s), e.action)).collect();
        // Stable: simultaneous events keep declaration order.
        scheduled.sort_by_key(|&(k, _)| k);
        let dt = lit::<T>(cfg.dt_s);
        let mut grid = Microgrid {
            step_count: cfg.step_count(),
            controller: ControllerState::new(&controller_params, dt),
            controller_params,
            plant,
            state: MicrogridState {
                t_s: 0.0,
                delta_f_hz: T::zero(),
                p_diesel_mw: T::zero(),
                p_pv_mw: T::zero(),
                p_wind_mw: T::zero(),
                p_load_mw: T::zero(),
                p_ev_mw: T::zero(),
            },
            cfg,
            step_index: 0,
            events: scheduled,
            next_event: 0,
            wind_override: None,
            wind_speed: T::zero(),
            last_step: None,
        };
        grid.apply_events();
        let (p_pv, p_wind, p_load) = grid.update_environment(0.0)?;
        grid.plant.diesel.dispatch_steady(p_load - p_pv - p_wind);
        grid.state.p_diesel_mw = grid.plant.diesel.p_mech_mw;
        grid.state.p_pv_mw = p_pv;
        grid.state.p_wind_mw = p_wind;
        grid.state.p_load_mw = p_load;
        grid.state.p_ev_mw = grid.plant.fleet.p_resp_mw;
        Ok(grid)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn plant(&self) -> &Plant<T> {
        &self.plant
    }

    pub fn controller(&self) -> &ControllerState<T> {
        &self.controller
    }

    pub fn state(&self) -> &MicrogridState<T> {
        &self.state
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn finished(&self) -> bool {
        self.step_index >= self.step_count
    }

    /// Wind speed the farm saw on the latest update.
    pub fn wind_speed(&self) -> T {
        self.wind_speed
    }

    pub fn last_step(&self) -> Option<&StepRecord<T>> {
        self.last_step.as_ref()
    }

    fn apply_events(&mut self) {
        while let Some(&(k, action)) = self.events.get(self.next_event) {
            if k > self.step_index {
                break;
            }
            match action {
                EventAction::PvDerate { factor } => self.plant.pv.derate_factor = lit(factor),
                EventAction::WindSpeed { m_s } => self.wind_override = m_s.map(lit),
                EventAction::AcmStart => self.plant.acm.start_time_s = Some(self.cfg.time_at(k)),
            }
            self.next_event += 1;
        }
    }

    /// Wind, PV and demand at `t_s`. Returns (pv, wind, load) in MW.
    fn update_environment(&mut self, t_s: f64) -> Result<(T, T, T), SimError> {
        let p = &mut self.plant;
        let v = self.wind_override.unwrap_or_else(|| p.wind.wind_profile.at(t_s));
        let v = finite("wind", "wind speed", v, t_s)?;
        p.wind.update_trip(v);
        self.wind_speed = v;
        let p_wind = finite("wind", "p_wind", wind_power(v, &p.wind), t_s)?;
        p.pv.update(t_s).map_err(|e| e.at_time(t_s).in_component("pv", t_s))?;
        let p_pv = finite("pv", "p_pv", pv_farm_power(&p.pv, t_s), t_s)?;
        let p_res = finite("residential-load", "p_load", residential_power(&p.residential, t_s), t_s)?;
        let p_acm = finite("acm", "p_acm", acm_power(&p.acm, t_s), t_s)?;
        Ok((p_pv, p_wind, p_res + p_acm))
    }

    /// Advances one integration step.
    pub fn step(&mut self) -> Result<(), SimError> {
        if self.finished() {
            return Err(SimError::Setup(format!(
                "step beyond the horizon of {} s",
                self.cfg.duration_s
            )));
        }
        let before = self.state;
        let dt = lit::<T>(self.cfg.dt_s);

        let p_imb = before.imbalance_mw();
        let delta_f = swing_step(before.delta_f_hz, p_imb, &self.cfg)
            .map_err(|e| e.at_time(before.t_s))?;

        self.step_index += 1;
        let t = self.cfg.time_at(self.step_index);
        self.apply_events();

        let net_demand = before.p_load_mw + before.p_ev_mw - before.p_pv_mw - before.p_wind_mw;
        self.plant.diesel.set_reference(net_demand);
        self.plant.diesel = governor_step(&self.plant.diesel, delta_f, dt).map_err(|e| e.at_time(t))?;
        let p_diesel = self.plant.diesel.p_mech_mw;
        let (p_pv, p_wind, p_load) = self.update_environment(t)?;

        let fleet = &mut self.plant.fleet;
        fleet.refresh_plugged(t);
        let input = ControllerInput {
            delta_f_hz: delta_f,
            f_nom_hz: lit(self.cfg.f_nom_hz),
            p_t_mw: p_diesel + p_pv + p_wind - p_load,
            se_percent: se_percent(fleet, t),
            limits: fleet.step_limits(t, dt),
        };
        let cmd = controller_step(&mut self.controller, &input, &self.controller_params, dt);
        let cmd = finite("controller", "command", cmd, t)?;
        fleet.respond_within(cmd, input.limits, t, dt)?;
        fleet.mode = self.controller.mode;
        fleet.allocate(t, dt)?;
        let p_ev = finite("ev-fleet", "p_ev", fleet.p_resp_mw, t)?;

        self.state = MicrogridState {
            t_s: t,
            delta_f_hz: delta_f,
            p_diesel_mw: p_diesel,
            p_pv_mw: p_pv,
            p_wind_mw: p_wind,
            p_load_mw: p_load,
            p_ev_mw: p_ev,
        };
        self.last_step = Some(StepRecord {
            t_start_s: before.t_s,
            delta_f_before_hz: before.delta_f_hz,
            p_imbalance_mw: p_imb,
            delta_f_after_hz: delta_f,
        });
        Ok(())
    }

    /// Snapshot of the current state for the trace.
    pub fn sample(&self) -> Sample {
        let s = &self.state;
        let fleet = &self.plant.fleet;
        let (lo, hi) = fleet.units.iter().fold((f64::NAN, f64::NAN), |(lo, hi), u| {
            let x = u.soc.as_f64();
            (lo.min(x), hi.max(x))
        });
        Sample {
            t_s: s.t_s,
            delta_f_hz: s.delta_f_hz.as_f64(),
            p_diesel_mw: s.p_diesel_mw.as_f64(),
            p_pv_mw: s.p_pv_mw.as_f64(),
            p_wind_mw: s.p_wind_mw.as_f64(),
            p_load_mw: s.p_load_mw.as_f64(),
            p_ev_mw: s.p_ev_mw.as_f64(),
            mean_soc: fleet.mean_soc().as_f64(),
            mode: if fleet.is_empty() { Mode::Idle } else { self.controller.mode },
            wind_speed_m_s: self.wind_speed.as_f64(),
            wind_online: self.plant.wind.online,
            soc_min: lo,
            soc_max: hi,
        }
    }

    /// Runs to the end of the horizon, sampling every `sample_every_s`.
    pub fn run(&mut self) -> RunOutcome {
        let stride = self.cfg.sample_stride();
        let mut trace = SimTrace::new(self.cfg.f_nom_hz);
        trace.samples.reserve(self.cfg.sample_count());
        if self.step_index.is_multiple_of(stride) {
            trace.samples.push(self.sample());
        }
        while !self.finished() {
            if let Err(e) = self.step() {
                return RunOutcome { trace, fault: Some(e) };
            }
            if self.step_index.is_multiple_of(stride) {
                trace.samples.push(self.sample());
            }
        }
        RunOutcome { trace, fault: None }
    }
}

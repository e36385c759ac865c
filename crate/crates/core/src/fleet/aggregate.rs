use crate::control::Mode;
use crate::error::SimError;
use crate::fleet::roster::time_of_day;
use crate::fleet::{EvUnit, FleetParams};
use crate::profile::DAY_S;
use crate::scalar::{clamp, lit, Scalar};

/// Largest tolerated gap between the aggregate response and the sum of the
/// per-vehicle allocations. Scalars coarser than `f64` get a rounding
/// allowance on top.
pub const ALLOCATION_TOLERANCE_MW: f64 = 1e-9;

/// Charge/discharge headroom of the fleet, both non-negative, in MW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetLimits<T> {
    pub max_charge_mw: T,
    pub max_discharge_mw: T,
}

impl<T: Scalar> FleetLimits<T> {
    pub fn zero() -> Self {
        FleetLimits {
            max_charge_mw: T::zero(),
            max_discharge_mw: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetState<T> {
    pub units: Vec<EvUnit<T>>,
    pub p_cap_mw: T,
    pub k_ev: T,
    pub t_ev_s: T,
    pub efficiency: T,
    pub soc_min: T,
    pub soc_max: T,
    /// Aggregate power actually drawn, `+` = charging. State of the
    /// first-order lag.
    pub p_resp_mw: T,
    pub mode: Mode,
    /// Per-vehicle power from the last allocation, kW, same sign convention.
    pub unit_power_kw: Vec<T>,
    plug_cache: PlugCache,
    scratch: Scratch<T>,
}

/// Indices of the plugged vehicles, valid while the time of day stays in
/// `[lo, hi)` (no schedule boundary inside). Derived data, so it never
/// takes part in equality.
#[derive(Debug, Clone, Default)]
struct PlugCache {
    valid: bool,
    lo: f64,
    hi: f64,
    n_units: usize,
    idx: Vec<usize>,
}

impl PartialEq for PlugCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// Reusable buffers for the allocation.
#[derive(Debug, Clone, Default)]
struct Scratch<T> {
    idx: Vec<usize>,
    weights: Vec<T>,
    ceilings: Vec<T>,
    shares: Vec<T>,
    fixed: Vec<bool>,
}

impl<T> PartialEq for Scratch<T> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl<T: Scalar> FleetState<T> {
    pub fn new(units: Vec<EvUnit<T>>, params: &FleetParams) -> Self {
        let cap = if params.cap_scales_with_fleet {
            params.p_cap_mw * units.len() as f64 / 100.0
        } else {
            params.p_cap_mw
        };
        let n = units.len();
        FleetState {
            units,
            p_cap_mw: lit(cap),
            k_ev: lit(params.k_ev),
            t_ev_s: lit(params.t_ev_s),
            efficiency: lit(params.efficiency),
            soc_min: lit(params.soc_min),
            soc_max: lit(params.soc_max),
            p_resp_mw: T::zero(),
            mode: Mode::Idle,
            unit_power_kw: vec![T::zero(); n],
            plug_cache: PlugCache::default(),
            scratch: Scratch::default(),
        }
    }

    fn cache_covers(&self, tod: f64) -> bool {
        let c = &self.plug_cache;
        c.valid && c.n_units == self.units.len() && tod >= c.lo && tod < c.hi
    }

    /// Caches the set of plugged vehicles at `t_s` together with the
    /// surrounding interval in which it cannot change. Queries at other
    /// instants inside that interval become lookups.
    pub fn refresh_plugged(&mut self, t_s: f64) {
        let tod = time_of_day(t_s);
        if self.cache_covers(tod) {
            return;
        }
        let (mut lo, mut hi) = (0.0, DAY_S);
        let c = &mut self.plug_cache;
        c.idx.clear();
        for (i, u) in self.units.iter().enumerate() {
            if u.plugged_at_tod(tod) {
                c.idx.push(i);
            }
            for &(a, b) in &u.plug_schedule {
                for x in [a, b] {
                    if x <= tod {
                        lo = f64::max(lo, x);
                    } else {
                        hi = f64::min(hi, x);
                    }
                }
            }
        }
        c.lo = lo;
        c.hi = hi;
        c.n_units = self.units.len();
        c.valid = true;
    }

    /// Calls `f` for every vehicle plugged in at `t_s`, in index order.
    fn for_each_plugged(&self, t_s: f64, mut f: impl FnMut(usize, &EvUnit<T>)) {
        let tod = time_of_day(t_s);
        if self.cache_covers(tod) {
            for &i in &self.plug_cache.idx {
                f(i, &self.units[i]);
            }
        } else {
            for (i, u) in self.units.iter().enumerate() {
                if u.plugged_at_tod(tod) {
                    f(i, u);
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn mean_soc(&self) -> T {
        if self.units.is_empty() {
            return T::nan();
        }
        let sum = self.units.iter().fold(T::zero(), |acc, u| acc + u.soc);
        sum / lit(self.units.len() as f64)
    }

    /// Stored energy above zero charge, kWh.
    pub fn stored_energy_kwh(&self) -> T {
        self.units.iter().fold(T::zero(), |acc, u| acc + u.soc * u.capacity_kwh)
    }

    /// Multipliers turning band headroom (as a fraction of capacity) into
    /// the largest power that fits in one step, kW per kWh of capacity.
    fn headroom_factors(&self, dt_s: T) -> (T, T) {
        let per_step = lit::<T>(3600.0) / dt_s;
        (per_step / self.efficiency, per_step * self.efficiency)
    }

    /// Per-vehicle power ceiling for one step, kW: the charger rating, or
    /// less if the remaining band would be crossed.
    fn unit_ceiling_kw(&self, u: &EvUnit<T>, charging: bool, factors: (T, T)) -> T {
        let energy = if charging {
            (self.soc_max - u.soc).max(T::zero()) * factors.0
        } else {
            (u.soc - self.soc_min).max(T::zero()) * factors.1
        };
        u.p_charger_kw.min(energy * u.capacity_kwh)
    }

    /// Limits that also respect the energy left in the band over the next
    /// step. Equal to [`dispatchable_limits`] except in the final step before
    /// a vehicle reaches a band edge.
    pub fn step_limits(&self, t_s: f64, dt_s: T) -> FleetLimits<T> {
        let factors = self.headroom_factors(dt_s);
        let mut chg = T::zero();
        let mut dis = T::zero();
        self.for_each_plugged(t_s, |_, u| {
            if u.soc < self.soc_max {
                chg = chg + self.unit_ceiling_kw(u, true, factors);
            }
            if u.soc > self.soc_min {
                dis = dis + self.unit_ceiling_kw(u, false, factors);
            }
        });
        let kw = lit::<T>(1e-3);
        FleetLimits {
            max_charge_mw: (chg * kw).min(self.p_cap_mw),
            max_discharge_mw: (dis * kw).min(self.p_cap_mw),
        }
    }
}

/// Share of the fleet plugged in with state of charge strictly inside the
/// operating band, in percent.
pub fn se_percent<T: Scalar>(fleet: &FleetState<T>, t_s: f64) -> T {
    if fleet.units.is_empty() {
        return T::zero();
    }
    let mut available = 0usize;
    fleet.for_each_plugged(t_s, |_, u| {
        if u.soc > fleet.soc_min && u.soc < fleet.soc_max {
            available += 1;
        }
    });
    lit::<T>(100.0 * available as f64 / fleet.units.len() as f64)
}

/// Charger-limited headroom of the plugged vehicles, capped by the
/// aggregate V2G rating.
pub fn dispatchable_limits<T: Scalar>(fleet: &FleetState<T>, t_s: f64) -> FleetLimits<T> {
    let mut chg = T::zero();
    let mut dis = T::zero();
    fleet.for_each_plugged(t_s, |_, u| {
        if u.soc < fleet.soc_max {
            chg = chg + u.p_charger_kw;
        }
        if u.soc > fleet.soc_min {
            dis = dis + u.p_charger_kw;
        }
    });
    let kw = lit::<T>(1e-3);
    FleetLimits {
        max_charge_mw: (chg * kw).min(fleet.p_cap_mw),
        max_discharge_mw: (dis * kw).min(fleet.p_cap_mw),
    }
}

/// One explicit-Euler step of `K_ev / (T_ev s + 1)` driven by `p_cmd_mw`,
/// followed by the availability clamp.
pub fn aggregate_response_step<T: Scalar>(
    fleet: &FleetState<T>,
    p_cmd_mw: T,
    t_s: f64,
    dt_s: T,
) -> Result<FleetState<T>, SimError> {
    let mut next = fleet.clone();
    next.respond(p_cmd_mw, t_s, dt_s)?;
    Ok(next)
}

impl<T: Scalar> FleetState<T> {
    /// In-place form of [`aggregate_response_step`].
    pub fn respond(&mut self, p_cmd_mw: T, t_s: f64, dt_s: T) -> Result<(), SimError> {
        let limits = self.step_limits(t_s, dt_s);
        self.respond_within(p_cmd_mw, limits, t_s, dt_s)
    }

    /// [`FleetState::respond`] with limits already evaluated by
    /// [`FleetState::step_limits`] for this instant.
    pub fn respond_within(&mut self, p_cmd_mw: T, limits: FleetLimits<T>, t_s: f64, dt_s: T) -> Result<(), SimError> {
        if !p_cmd_mw.is_finite() {
            return Err(SimError::non_finite("ev-fleet", t_s, format!("command {p_cmd_mw}")));
        }
        let p = self.p_resp_mw + dt_s * (self.k_ev * p_cmd_mw - self.p_resp_mw) / self.t_ev_s;
        self.p_resp_mw = clamp(p, -limits.max_discharge_mw, limits.max_charge_mw);
        Ok(())
    }
}

/// Water-filling split of `total_kw` across `ceilings` proportional to
/// `weights`, never exceeding a ceiling. Results go to `out`.
fn split_by_headroom<T: Scalar>(total_kw: T, weights: &[T], ceilings: &[T], out: &mut Vec<T>, fixed: &mut Vec<bool>) {
    let n = weights.len();
    out.clear();
    out.resize(n, T::zero());
    fixed.clear();
    fixed.resize(n, false);
    let mut remaining = total_kw;
    let mut weight_sum = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    loop {
        if weight_sum <= T::zero() || remaining <= T::zero() {
            break;
        }
        let per_weight = remaining / weight_sum;
        let mut saturated = false;
        for i in 0..n {
            if !fixed[i] && per_weight * weights[i] >= ceilings[i] {
                out[i] = ceilings[i];
                fixed[i] = true;
                saturated = true;
            }
        }
        if saturated {
            remaining = total_kw - out.iter().fold(T::zero(), |acc, &p| acc + p);
            weight_sum = (0..n)
                .filter(|&i| !fixed[i])
                .fold(T::zero(), |acc, i| acc + weights[i]);
            continue;
        }
        for i in 0..n {
            if !fixed[i] {
                out[i] = per_weight * weights[i];
            }
        }
        break;
    }
}

/// Splits the aggregate response across plugged vehicles in proportion to
/// their remaining band headroom, then integrates each state of charge over
/// `dt_s`. No vehicle leaves `[soc_min, soc_max]`.
pub fn allocate_and_update_soc<T: Scalar>(
    fleet: &FleetState<T>,
    t_s: f64,
    dt_s: T,
) -> Result<FleetState<T>, SimError> {
    let mut next = fleet.clone();
    next.allocate(t_s, dt_s)?;
    Ok(next)
}

impl<T: Scalar> FleetState<T> {
    /// In-place form of [`allocate_and_update_soc`].
    pub fn allocate(&mut self, t_s: f64, dt_s: T) -> Result<(), SimError> {
        for p in self.unit_power_kw.iter_mut() {
            *p = T::zero();
        }
        let p_total = self.p_resp_mw;
        if p_total == T::zero() {
            return Ok(());
        }
        let charging = p_total > T::zero();
        let total_kw = p_total.abs() * lit(1e3);
        let factors = self.headroom_factors(dt_s);

        let mut sc = std::mem::take(&mut self.scratch);
        sc.idx.clear();
        sc.weights.clear();
        sc.ceilings.clear();
        self.for_each_plugged(t_s, |i, u| {
            let headroom = if charging {
                self.soc_max - u.soc
            } else {
                u.soc - self.soc_min
            };
            if headroom > T::zero() {
                sc.idx.push(i);
                sc.weights.push(headroom);
                sc.ceilings.push(self.unit_ceiling_kw(u, charging, factors));
            }
        });
        split_by_headroom(total_kw, &sc.weights, &sc.ceilings, &mut sc.shares, &mut sc.fixed);
        let allocated_kw = sc.shares.iter().fold(T::zero(), |acc, &p| acc + p);
        let residual_mw = (total_kw - allocated_kw).abs().as_f64() * 1e-3;
        let rounding_mw = 64.0 * T::epsilon().as_f64() * p_total.abs().as_f64() * sc.idx.len().max(1) as f64;
        if residual_mw > ALLOCATION_TOLERANCE_MW.max(rounding_mw) {
            self.scratch = sc;
            return Err(SimError::AllocationResidual { residual_mw, t_s });
        }

        let hours = dt_s / lit::<T>(3600.0);
        for (&i, &p_kw) in sc.idx.iter().zip(&sc.shares) {
            let u = &mut self.units[i];
            let energy_kwh = p_kw * hours;
            let dsoc = if charging {
                self.efficiency * energy_kwh / u.capacity_kwh
            } else {
                -energy_kwh / (self.efficiency * u.capacity_kwh)
            };
            u.soc = clamp(u.soc + dsoc, self.soc_min, self.soc_max);
            self.unit_power_kw[i] = if charging { p_kw } else { -p_kw };
        }
        self.scratch = sc;
        Ok(())
    }
}

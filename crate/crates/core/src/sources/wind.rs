use crate::profile::Profile;
use crate::scalar::{lit, Scalar};

/// Wind farm lumped into one turbine of equivalent swept area, with
/// high-wind cut-out hysteresis.
#[derive(Debug, Clone, PartialEq)]
pub struct WindFarm<T> {
    pub p_rated_mw: T,
    pub rho_kg_m3: T,
    pub area_m2: T,
    pub cp: T,
    pub v_trip_m_s: T,
    pub v_reconnect_m_s: T,
    pub online: bool,
    pub wind_profile: Profile<T>,
}

impl<T: Scalar> WindFarm<T> {
    /// Chooses the swept area so the farm produces exactly its rating at
    /// `v_rated_m_s`.
    pub fn rated_at(
        p_rated_mw: T,
        v_rated_m_s: T,
        rho_kg_m3: T,
        cp: T,
        v_trip_m_s: T,
        v_reconnect_m_s: T,
        wind_profile: Profile<T>,
    ) -> Self {
        let area_m2 = lit::<T>(2e6) * p_rated_mw / (rho_kg_m3 * cp * v_rated_m_s.powi(3));
        WindFarm {
            p_rated_mw,
            rho_kg_m3,
            area_m2,
            cp,
            v_trip_m_s,
            v_reconnect_m_s,
            online: true,
            wind_profile,
        }
    }

    /// Aerodynamic power `0.5 * rho * A * cp * v^3` in MW, without clamp or
    /// trip state.
    pub fn aerodynamic_mw(&self, v_m_s: T) -> T {
        lit::<T>(0.5e-6) * self.rho_kg_m3 * self.area_m2 * self.cp * v_m_s.max(T::zero()).powi(3)
    }
}

pub fn wind_power<T: Scalar>(v_m_s: T, farm: &WindFarm<T>) -> T {
    if !farm.online {
        return T::zero();
    }
    farm.aerodynamic_mw(v_m_s).min(farm.p_rated_mw)
}

/// Cut-out hysteresis: trips above `v_trip`, reconnects at or below
/// `v_reconnect`, otherwise keeps its state.
pub fn wind_trip_update<T: Scalar>(farm: &WindFarm<T>, v_m_s: T) -> WindFarm<T> {
    let mut next = farm.clone();
    next.update_trip(v_m_s);
    next
}

impl<T: Scalar> WindFarm<T> {
    /// In-place form of [`wind_trip_update`].
    pub fn update_trip(&mut self, v_m_s: T) {
        self.online = if self.online {
            v_m_s <= self.v_trip_m_s
        } else {
            v_m_s <= self.v_reconnect_m_s
        };
    }
}

//! Sampled 24-hour environment series held zero-order between samples.

use std::path::Path;

use crate::error::ConfigError;
use crate::scalar::{lit, Scalar};

/// Native resolution of every built-in profile.
pub const PROFILE_STEP_S: f64 = 60.0;
pub const DAY_S: f64 = 86_400.0;

/// A time series of `(time_s, value)` samples, strictly increasing in time,
/// evaluated by zero-order hold. Before the first sample the first value
/// applies.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    times: Vec<f64>,
    values: Vec<T>,
}

impl<T: Scalar> Profile<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self, String> {
        if times.is_empty() || times.len() != values.len() {
            return Err("profile needs at least one sample and equal-length columns".into());
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("profile times must be strictly increasing".into());
        }
        if times.iter().any(|t| !t.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err("profile contains non-finite samples".into());
        }
        Ok(Profile { times, values })
    }

    pub fn constant(value: T) -> Self {
        Profile {
            times: vec![0.0],
            values: vec![value],
        }
    }

    /// Samples `f` every [`PROFILE_STEP_S`] over one day.
    pub fn from_fn(f: impl Fn(f64) -> f64) -> Self {
        let n = (DAY_S / PROFILE_STEP_S) as usize;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * PROFILE_STEP_S).collect();
        let values = times.iter().map(|&t| lit(f(t))).collect();
        Profile { times, values }
    }

    /// Value of the latest sample at or before `t_s`.
    pub fn at(&self, t_s: f64) -> T {
        let idx = self.times.partition_point(|&s| s <= t_s);
        self.values[idx.saturating_sub(1)]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, T)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Reads a two-column CSV with a header row (`time_s,value`).
    pub fn from_csv(path: &Path) -> Result<Self, ConfigError> {
        let bad = |reason: String| ConfigError::BadInputFile {
            path: path.display().to_string(),
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| ConfigError::Unreadable {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            if record.len() < 2 {
                return Err(bad(format!("row {}: expected two columns", row + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("row {}: cannot parse `{s}`", row + 2)))
            };
            times.push(parse(&record[0])?);
            values.push(lit(parse(&record[1])?));
        }
        Profile::new(times, values).map_err(bad)
    }
}

/// Clear-sky irradiance: a half-sine between sunrise and sunset, zero
/// outside, sampled at 60 s.
pub fn default_irradiance<T: Scalar>(sunrise_s: f64, sunset_s: f64, peak_w_m2: f64) -> Profile<T> {
    Profile::from_fn(|t| {
        if t <= sunrise_s || t >= sunset_s {
            0.0
        } else {
            peak_w_m2 * (std::f64::consts::PI * (t - sunrise_s) / (sunset_s - sunrise_s)).sin()
        }
    })
}

/// Residential demand multiplier: 0.7 pu overnight, ramping to 1.0 pu over
/// 06:00-07:00 and back down over 21:00-22:00.
pub fn default_load_multiplier<T: Scalar>() -> Profile<T> {
    Profile::from_fn(|t| {
        let h = t / 3600.0;
        match h {
            h if h < 6.0 => 0.7,
            h if h < 7.0 => 0.7 + 0.3 * (h - 6.0),
            h if h < 21.0 => 1.0,
            h if h < 22.0 => 1.0 - 0.3 * (h - 21.0),
            _ => 0.7,
        }
    })
}

/// Wind speed in m/s: breezy overnight, calm around noon, building towards
/// the nominal 13.5 m/s through the evening. Never exceeds 13.5 m/s, so the
/// farm stays online unless a scenario injects a gust.
pub fn default_wind_speed<T: Scalar>() -> Profile<T> {
    const KNOTS: [(f64, f64); 7] = [
        (0.0, 12.0),
        (6.0, 9.0),
        (12.0, 7.0),
        (18.0, 10.0),
        (21.0, 13.5),
        (23.0, 13.5),
        (24.0, 12.0),
    ];
    Profile::from_fn(|t| {
        let h = t / 3600.0;
        let k = KNOTS.windows(2).find(|w| h < w[1].0).unwrap_or(&KNOTS[5..7]);
        let (h0, v0) = k[0];
        let (h1, v1) = k[1];
        v0 + (v1 - v0) * (h - h0) / (h1 - h0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_order_hold_returns_floor_sample() {
        let p = Profile::new(vec![0.0, 60.0, 120.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.at(0.0), 1.0);
        assert_eq!(p.at(59.99), 1.0);
        assert_eq!(p.at(60.0), 2.0);
        assert_eq!(p.at(1e9), 3.0);
        assert_eq!(p.at(-5.0), 1.0);
    }

    #[test]
    fn rejects_unordered_times() {
        assert!(Profile::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Profile::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn default_profiles_have_native_resolution() {
        let g: Profile<f64> = default_irradiance(25_000.0, 61_400.0, 1000.0);
        assert_eq!(g.len(), 1440);
        assert_eq!(g.at(0.0), 0.0);
        assert_eq!(g.at(24_999.0), 0.0);
        assert!((g.at(43_200.0) - 1000.0).abs() < 1e-9);
        assert_eq!(g.at(70_000.0), 0.0);

        let w: Profile<f64> = default_wind_speed();
        assert!(w.max_value() <= 13.5 + 1e-12);
        assert!((w.at(79_200.0) - 13.5).abs() < 1e-12);

        let l: Profile<f64> = default_load_multiplier();
        assert_eq!(l.at(43_200.0), 1.0);
        assert_eq!(l.at(0.0), 0.7);
        assert!(l.min_value() >= 0.0 && l.max_value() <= 1.5);
    }

    #[test]
    fn reads_two_column_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "time_s,value\n0,1.5\n60, 2.5\n").unwrap();
        let p: Profile<f64> = Profile::from_csv(&path).unwrap();
        assert_eq!(p.at(30.0), 1.5);
        assert_eq!(p.at(61.0), 2.5);

        std::fs::write(&path, "time_s,value\n0,abc\n").unwrap();
        assert!(matches!(
            Profile::<f64>::from_csv(&path),
            Err(ConfigError::BadInputFile { .. })
        ));
    }
}

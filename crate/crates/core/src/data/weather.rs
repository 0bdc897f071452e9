use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Exogenous weather quantities used to condition the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeatherVar {
    /// Dry-bulb temperature, °C.
    Temperature,
    /// Relative humidity, %.
    Humidity,
    /// m/s.
    WindSpeed,
    /// km.
    Visibility,
    /// 1 between sunrise and sunset, else 0.
    Daylight,
}

impl WeatherVar {
    pub const ALL: [WeatherVar; 5] = [
        WeatherVar::Temperature,
        WeatherVar::Humidity,
        WeatherVar::WindSpeed,
        WeatherVar::Visibility,
        WeatherVar::Daylight,
    ];

    /// Flags are resampled by nearest neighbour instead of linearly.
    pub fn is_flag(self) -> bool {
        matches!(self, WeatherVar::Daylight)
    }

    pub fn name(self) -> &'static str {
        match self {
            WeatherVar::Temperature => "temperature",
            WeatherVar::Humidity => "humidity",
            WeatherVar::WindSpeed => "wind_speed",
            WeatherVar::Visibility => "visibility",
            WeatherVar::Daylight => "daylight",
        }
    }
}

impl fmt::Display for WeatherVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeatherVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeatherVar::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| invalid(format!("unknown weather channel `{s}`")))
    }
}

/// Equal-length weather channels sampled on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherTrack {
    pub period_min: u32,
    channels: Vec<(WeatherVar, Vec<f64>)>,
}

impl WeatherTrack {
    pub fn new(period_min: u32, channels: Vec<(WeatherVar, Vec<f64>)>) -> Result<Self> {
        if period_min == 0 {
            return Err(invalid("weather period must be positive"));
        }
        let len = channels.first().map_or(0, |c| c.1.len());
        for (var, values) in &channels {
            if values.is_empty() {
                return Err(invalid(format!("weather channel `{var}` is empty")));
            }
            if values.len() != len {
                return Err(Error::LengthMismatch {
                    op: "weather channels",
                    left: len,
                    right: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("weather channel `{var}` has non-finite values")));
            }
        }
        Ok(Self {
            period_min,
            channels,
        })
    }

    pub fn channels(&self) -> &[(WeatherVar, Vec<f64>)] {
        &self.channels
    }

    pub fn channel(&self, var: WeatherVar) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, c)| c.as_slice())
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Resamples onto a grid of `len` points at `period_min`, starting at the
    /// first knot. Used to align a knot track with a profile grid.
    pub fn aligned(&self, period_min: u32, len: usize) -> Result<WeatherTrack> {
        let fine = interpolate_weather(self, period_min)?;
        if fine.len() < len {
            return Err(invalid(format!(
                "weather covers {} points at {period_min} min, profile needs {len}",
                fine.len()
            )));
        }
        let channels = fine
            .channels
            .into_iter()
            .map(|(v, mut c)| {
                c.truncate(len);
                (v, c)
            })
            .collect();
        WeatherTrack::new(period_min, channels)
    }
}

/// Piecewise-linear resampling of every channel onto a finer (or coarser)
/// grid spanning the original knots. Flag channels use the nearest knot.
///
/// The result covers `[0, (n-1) * period]` so endpoints are preserved.
pub fn interpolate_weather(track: &WeatherTrack, target_period_min: u32) -> Result<WeatherTrack> {
    if target_period_min == 0 {
        return Err(invalid("target period must be positive"));
    }
    let n = track.len();
    if n < 2 {
        return Err(invalid(format!("need at least 2 weather knots, got {n}")));
    }
    let span = (n - 1) as u64 * u64::from(track.period_min);
    let out_len = (span / u64::from(target_period_min)) as usize + 1;
    let src = f64::from(track.period_min);
    let channels = track
        .channels
        .iter()
        .map(|(var, values)| {
            let out = (0..out_len)
                .map(|i| {
                    let minutes = i as u64 * u64::from(target_period_min);
                    let k = (minutes / u64::from(track.period_min)) as usize;
                    let rem = (minutes % u64::from(track.period_min)) as f64 / src;
                    if k + 1 >= n {
                        values[n - 1]
                    } else if var.is_flag() {
                        if rem < 0.5 {
                            values[k]
                        } else {
                            values[k + 1]
                        }
                    } else {
                        values[k] + rem * (values[k + 1] - values[k])
                    }
                })
                .collect();
            (*var, out)
        })
        .collect();
    WeatherTrack::new(target_period_min, channels)
}

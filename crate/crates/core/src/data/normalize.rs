use serde::{Deserialize, Serialize};

use crate::data::{WeatherTrack, WeatherVar};
use crate::error::{invalid, Result};

pub const STD_FLOOR: f64 = 1e-8;

/// Affine z-score map `x -> (x - mean) / std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub mean: f64,
    pub std: f64,
}

impl ZScore {
    /// Population mean and standard deviation over every value of every
    /// series; the standard deviation is floored at [`STD_FLOOR`].
    pub fn fit<S: AsRef<[f64]>>(series: &[S]) -> Result<Self> {
        let n: usize = series.iter().map(|s| s.as_ref().len()).sum();
        if n == 0 {
            return Err(invalid("cannot fit normalization on an empty corpus"));
        }
        let mean = series.iter().flat_map(|s| s.as_ref()).sum::<f64>() / n as f64;
        let var = series
            .iter()
            .flat_map(|s| s.as_ref())
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n as f64;
        Ok(Self {
            mean,
            std: var.sqrt().max(STD_FLOOR),
        })
    }

    pub fn normalize(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| (v - self.mean) / self.std).collect()
    }

    pub fn denormalize(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| v * self.std + self.mean).collect()
    }
}

/// Statistics fitted on the training split and reused for every other split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub load: ZScore,
    pub weather: Vec<(WeatherVar, ZScore)>,
}

impl Normalizer {
    pub fn fit<S: AsRef<[f64]>>(train_loads: &[S], train_weather: &[&WeatherTrack]) -> Result<Self> {
        let load = ZScore::fit(train_loads)?;
        let weather = match train_weather.first() {
            None => Vec::new(),
            Some(first) => first
                .channels()
                .iter()
                .map(|(var, _)| {
                    let cols: Vec<&[f64]> = train_weather
                        .iter()
                        .map(|w| w.channel(*var).ok_or_else(|| invalid(format!("missing weather channel `{var}`"))))
                        .collect::<Result<_>>()?;
                    Ok((*var, ZScore::fit(&cols)?))
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self { load, weather })
    }

    /// Normalized weather channels in this normalizer's channel order.
    pub fn normalize_weather(&self, track: &WeatherTrack) -> Result<Vec<Vec<f64>>> {
        self.weather
            .iter()
            .map(|(var, z)| {
                track
                    .channel(*var)
                    .map(|c| z.normalize(c))
                    .ok_or_else(|| invalid(format!("missing weather channel `{var}`")))
            })
            .collect()
    }
}

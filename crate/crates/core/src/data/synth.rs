//! Seeded generative model of household consumption.
//!
//! A day is simulated at one-minute resolution and block-averaged to the
//! 5-minute output grid. Load is the sum of
//!
//! - a constant base load,
//! - a thermostatic (cooling) appliance that cycles with a fixed period and a
//!   duty fraction `clamp((T - setpoint) / band, 0, 1)` evaluated at each
//!   cycle start, where `T` is the synthetic outdoor temperature, and
//! - event appliances switched on a Poisson number of times per day for a
//!   fixed duration at a uniformly drawn start minute.
//!
//! When the duty fraction never saturates, the expected daily mean power is
//! `base + P_cool * (mean_temp - setpoint) / band + sum(P_i * rate_i * dur_i / 1440)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::downsample::block_mean;
use crate::data::{LoadProfile, WeatherTrack, WeatherVar, MINUTES_PER_DAY};
use crate::error::{invalid, Result};
use crate::rng;

/// Output sampling period of synthesized profiles.
pub const SYNTH_PERIOD_MIN: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thermostat {
    pub power_kw: f64,
    pub cycle_min: u32,
    pub setpoint_c: f64,
    /// Temperature excess (°C) at which the duty cycle reaches 100%.
    pub band_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAppliance {
    pub name: String,
    pub power_kw: f64,
    pub rate_per_day: f64,
    pub duration_min: u32,
}

/// Daily outdoor conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Climate {
    pub mean_temp_c: f64,
    /// Half the peak-to-trough diurnal swing; the peak falls at 15:00.
    pub diurnal_amp_c: f64,
    /// Standard deviation of a whole-day temperature offset.
    pub day_noise_c: f64,
    pub sunrise_h: f64,
    pub sunset_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub base_kw: f64,
    pub thermostat: Thermostat,
    pub events: Vec<EventAppliance>,
    pub climate: Climate,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let t = &self.thermostat;
        if !(self.base_kw >= 0.0 && t.power_kw >= 0.0) {
            return Err(invalid("synthetic powers must be >= 0"));
        }
        if t.cycle_min == 0 || t.band_c <= 0.0 {
            return Err(invalid("thermostat cycle and band must be positive"));
        }
        for e in &self.events {
            if !(e.power_kw >= 0.0 && e.rate_per_day >= 0.0) {
                return Err(invalid(format!("appliance `{}` has a negative power or rate", e.name)));
            }
            if e.duration_min == 0 || e.duration_min > MINUTES_PER_DAY {
                return Err(invalid(format!("appliance `{}` duration out of range", e.name)));
            }
        }
        if self.climate.day_noise_c < 0.0 || self.climate.diurnal_amp_c < 0.0 {
            return Err(invalid("climate spreads must be >= 0"));
        }
        Ok(())
    }

    /// Mean power assuming the duty fraction never saturates.
    pub fn expected_mean_kw(&self) -> f64 {
        let t = &self.thermostat;
        let duty = (self.climate.mean_temp_c - t.setpoint_c) / t.band_c;
        let events: f64 = self
            .events
            .iter()
            .map(|e| e.power_kw * e.rate_per_day * f64::from(e.duration_min) / f64::from(MINUTES_PER_DAY))
            .sum();
        self.base_kw + t.power_kw * duty + events
    }
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            base_kw: 0.35,
            thermostat: Thermostat {
                power_kw: 3.5,
                cycle_min: 20,
                setpoint_c: 22.0,
                band_c: 8.0,
            },
            events: vec![
                EventAppliance {
                    name: "dryer".into(),
                    power_kw: 4.0,
                    rate_per_day: 0.5,
                    duration_min: 50,
                },
                EventAppliance {
                    name: "oven".into(),
                    power_kw: 2.5,
                    rate_per_day: 0.8,
                    duration_min: 35,
                },
                EventAppliance {
                    name: "kettle".into(),
                    power_kw: 1.5,
                    rate_per_day: 3.0,
                    duration_min: 5,
                },
            ],
            climate: Climate {
                mean_temp_c: 27.0,
                diurnal_amp_c: 4.0,
                day_noise_c: 1.5,
                sunrise_h: 6.5,
                sunset_h: 19.5,
            },
        }
    }
}

/// Outdoor temperature at `minute` given the day's offset.
fn temperature(climate: &Climate, day_offset: f64, minute: f64) -> f64 {
    let hours = minute / 60.0;
    climate.mean_temp_c + day_offset + climate.diurnal_amp_c * (2.0 * PI * (hours - 15.0) / 24.0).cos()
}

/// Simulates one day: a 5-minute profile and an hourly weather track with 25
/// knots (midnight to midnight inclusive).
pub fn synthesize_profile<R: Rng + ?Sized>(
    spec: &SynthSpec,
    household_id: &str,
    day: i64,
    rng: &mut R,
) -> Result<(LoadProfile, WeatherTrack)> {
    spec.validate()?;
    let minutes = MINUTES_PER_DAY as usize;
    let climate = &spec.climate;
    let day_offset = if climate.day_noise_c > 0.0 {
        Normal::new(0.0, climate.day_noise_c).expect("valid std").sample(rng)
    } else {
        0.0
    };

    let mut load = vec![spec.base_kw; minutes];

    let th = &spec.thermostat;
    let cycle = th.cycle_min as usize;
    let phase = rng.random_range(0..cycle);
    if th.power_kw > 0.0 {
        // first cycle starts `phase` minutes before midnight
        let mut start = -(phase as i64);
        while start < minutes as i64 {
            let t = temperature(climate, day_offset, start.max(0) as f64);
            let duty = ((t - th.setpoint_c) / th.band_c).clamp(0.0, 1.0);
            let on = (duty * cycle as f64).round() as i64;
            for m in start.max(0)..(start + on).min(minutes as i64) {
                load[m as usize] += th.power_kw;
            }
            start += cycle as i64;
        }
    }

    for e in &spec.events {
        if e.rate_per_day <= 0.0 {
            continue;
        }
        let count = Poisson::new(e.rate_per_day).expect("positive rate").sample(rng) as usize;
        let latest = minutes - e.duration_min as usize;
        for _ in 0..count {
            let start = rng.random_range(0..=latest);
            for v in &mut load[start..start + e.duration_min as usize] {
                *v += e.power_kw;
            }
        }
    }

    let values = block_mean(&load, SYNTH_PERIOD_MIN as usize)?;
    let profile = LoadProfile::new(household_id, day, SYNTH_PERIOD_MIN, values)?;

    let wind_noise = Normal::new(0.0, 0.8).expect("valid std");
    let wind_level: f64 = rng.random_range(1.0..6.0);
    let vis_level: f64 = rng.random_range(6.0..16.0);
    let mut temp = Vec::with_capacity(25);
    let mut humidity = Vec::with_capacity(25);
    let mut wind = Vec::with_capacity(25);
    let mut visibility = Vec::with_capacity(25);
    let mut daylight = Vec::with_capacity(25);
    for h in 0..=24 {
        let t = temperature(climate, day_offset, f64::from(h) * 60.0);
        temp.push(t);
        humidity.push((85.0 - 2.0 * (t - 20.0)).clamp(10.0, 100.0));
        wind.push((wind_level + wind_noise.sample(rng)).max(0.0));
        visibility.push((vis_level - 0.1 * (t - 25.0)).max(0.5));
        let hour = f64::from(h);
        daylight.push(if hour >= climate.sunrise_h && hour < climate.sunset_h { 1.0 } else { 0.0 });
    }
    let weather = WeatherTrack::new(
        60,
        vec![
            (WeatherVar::Temperature, temp),
            (WeatherVar::Humidity, humidity),
            (WeatherVar::WindSpeed, wind),
            (WeatherVar::Visibility, visibility),
            (WeatherVar::Daylight, daylight),
        ],
    )?;
    Ok((profile, weather))
}

/// Shape of a synthetic multi-household corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub households: usize,
    pub days_per_household: usize,
    /// Day-of-year of the first simulated day.
    pub first_day: i64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            households: 20,
            days_per_household: 100,
            first_day: 120,
            seed: 2022,
        }
    }
}

/// Generated household-days with their hourly weather, in household-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub profiles: Vec<LoadProfile>,
    pub weather: Vec<WeatherTrack>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Draws a household's appliance stock.
pub fn household_spec<R: Rng + ?Sized>(rng: &mut R) -> SynthSpec {
    let mut spec = SynthSpec::default();
    spec.base_kw = rng.random_range(0.2..0.6);
    spec.thermostat = Thermostat {
        power_kw: rng.random_range(2.5..4.5),
        cycle_min: [15, 20, 25, 30][rng.random_range(0..4)],
        setpoint_c: rng.random_range(21.0..24.0),
        band_c: rng.random_range(6.0..10.0),
    };
    spec.events = vec![
        EventAppliance {
            name: "dryer".into(),
            power_kw: rng.random_range(3.0..5.0),
            rate_per_day: rng.random_range(0.3..0.8),
            duration_min: rng.random_range(40..60),
        },
        EventAppliance {
            name: "oven".into(),
            power_kw: rng.random_range(2.0..3.0),
            rate_per_day: rng.random_range(0.5..1.0),
            duration_min: rng.random_range(20..60),
        },
        EventAppliance {
            name: "ev".into(),
            power_kw: 6.6,
            rate_per_day: rng.random_range(0.0..0.4),
            duration_min: rng.random_range(90..180),
        },
        EventAppliance {
            name: "kettle".into(),
            power_kw: rng.random_range(1.2..1.8),
            rate_per_day: rng.random_range(2.0..4.0),
            duration_min: rng.random_range(3..8),
        },
    ];
    spec
}

/// Seasonal climate for a day of year (northern-hemisphere summer peak in July).
pub fn seasonal_climate(day_of_year: i64) -> Climate {
    let season = (2.0 * PI * (day_of_year as f64 - 105.0) / 365.0).sin();
    Climate {
        mean_temp_c: 22.0 + 7.0 * season,
        diurnal_amp_c: 4.0 + 1.5 * season,
        day_noise_c: 2.0,
        sunrise_h: 6.5 - 1.0 * season,
        sunset_h: 18.5 + 1.5 * season,
    }
}

/// Builds a corpus deterministically from `spec.seed`.
pub fn synthesize_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    let mut profiles = Vec::with_capacity(spec.households * spec.days_per_household);
    let mut weather = Vec::with_capacity(profiles.capacity());
    for h in 0..spec.households {
        let household = format!("h{h:03}");
        let mut hr = rng::stream(spec.seed, &format!("household/{household}"));
        let mut hspec = household_spec(&mut hr);
        for d in 0..spec.days_per_household {
            let day = spec.first_day + d as i64;
            hspec.climate = seasonal_climate(day);
            let (p, w) = synthesize_profile(&hspec, &household, day, &mut hr)?;
            profiles.push(p);
            weather.push(w);
        }
    }
    Ok(Corpus { profiles, weather })
}

use std::collections::BTreeMap;

use crate::data::{
    downsample, flag_abnormal, load_csv_resampled, load_weather_csv, split_dataset, synthesize_corpus,
    CorpusSpec, DatasetSplit, LoadProfile, Normalizer, SplitFractions, WeatherTrack, WeatherVar,
};
use crate::error::{invalid, Result};
use crate::harness::RunConfig;
use crate::rng;
use crate::signal::{Shape, Tensor};

/// Threshold passed to [`flag_abnormal`] when ingesting CSV data.
pub const ABNORMAL_PEAK_MULTIPLE: f64 = 10.0;

/// One paired household-day.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub hr: LoadProfile,
    pub lr: LoadProfile,
    /// Weather on the low-resolution grid.
    pub weather: Option<WeatherTrack>,
}

impl Sample {
    pub fn id(&self) -> String {
        format!("{}/{}", self.hr.household_id, self.hr.day)
    }
}

/// Paired, split and normalized data for one scale factor.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub alpha: usize,
    pub samples: Vec<Sample>,
    pub split: DatasetSplit,
    pub normalizer: Normalizer,
}

/// Normalized tensors for a set of sample indices.
#[derive(Debug, Clone)]
pub struct Batch {
    pub lr: Tensor,
    pub weather: Option<Tensor>,
    pub hr: Tensor,
}

impl Dataset {
    /// Synthesizes (or reads, when `config.data` is set) high-resolution days,
    /// downsamples them, splits by day and fits normalization on the training
    /// split.
    pub fn prepare(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let (profiles, weather) = match &config.data {
            None => {
                let corpus = synthesize_corpus(&CorpusSpec {
                    households: config.households,
                    days_per_household: config.days_per_household,
                    seed: config.seed,
                    ..CorpusSpec::default()
                })?;
                let w = corpus.weather.into_iter().map(Some).collect();
                (corpus.profiles, w)
            }
            Some(path) => {
                let mut profiles = load_csv_resampled(path, config.hr_period)?;
                let abnormal = flag_abnormal(&profiles, ABNORMAL_PEAK_MULTIPLE);
                for &i in abnormal.iter().rev() {
                    profiles.remove(i);
                }
                let weather = match &config.weather_data {
                    None => vec![None; profiles.len()],
                    Some(wpath) => {
                        let by_day: BTreeMap<i64, WeatherTrack> = load_weather_csv(wpath)?.into_iter().collect();
                        profiles
                            .iter()
                            .map(|p| {
                                by_day
                                    .get(&p.day)
                                    .cloned()
                                    .map(Some)
                                    .ok_or_else(|| invalid(format!("no weather for day {}", p.day)))
                            })
                            .collect::<Result<_>>()?
                    }
                };
                (profiles, weather)
            }
        };
        Self::from_profiles(config, profiles, weather)
    }

    pub fn from_profiles(
        config: &RunConfig,
        profiles: Vec<LoadProfile>,
        weather: Vec<Option<WeatherTrack>>,
    ) -> Result<Self> {
        if profiles.len() != weather.len() {
            return Err(invalid("one weather entry (or none) per profile required"));
        }
        if profiles.len() < 3 {
            return Err(invalid(format!("need at least 3 days, got {}", profiles.len())));
        }
        let alpha = config.alpha;
        let lr_len = config.lr_len();
        let use_weather = config.weather;
        let mut noise = rng::stream(config.seed, "noise");
        let mut samples = Vec::with_capacity(profiles.len());
        for (hr, w) in profiles.into_iter().zip(weather) {
            if hr.period_min != config.hr_period || hr.len() != config.hr_len() {
                return Err(invalid(format!(
                    "profile {}/{} has {} samples at {} min, expected {} at {} min",
                    hr.household_id,
                    hr.day,
                    hr.len(),
                    hr.period_min,
                    config.hr_len(),
                    config.hr_period
                )));
            }
            let lr = downsample(&hr, alpha, config.noise_var, &mut noise)?;
            let weather = match (use_weather, w) {
                (false, _) => None,
                (true, Some(w)) => Some(w.aligned(lr.period_min, lr_len)?),
                (true, None) => return Err(invalid("weather conditioning requested but no weather supplied")),
            };
            samples.push(Sample { hr, lr, weather });
        }
        let split = split_dataset(samples.len(), SplitFractions::default(), config.seed)?;
        let train_hr: Vec<&[f64]> = split.train.iter().map(|&i| samples[i].hr.values()).collect();
        let train_w: Vec<&WeatherTrack> = split.train.iter().filter_map(|&i| samples[i].weather.as_ref()).collect();
        let normalizer = Normalizer::fit(&train_hr, &train_w)?;
        Ok(Self {
            alpha,
            samples,
            split,
            normalizer,
        })
    }

    pub fn weather_channels(&self) -> usize {
        self.normalizer.weather.len()
    }

    pub fn weather_vars(&self) -> Vec<WeatherVar> {
        self.normalizer.weather.iter().map(|(v, _)| *v).collect()
    }

    pub fn hr_len(&self) -> usize {
        self.samples[0].hr.len()
    }

    pub fn lr_len(&self) -> usize {
        self.samples[0].lr.len()
    }

    pub fn batch(&self, indices: &[usize]) -> Result<Batch> {
        let z = &self.normalizer.load;
        let lr: Vec<Vec<f64>> = indices.iter().map(|&i| z.normalize(self.samples[i].lr.values())).collect();
        let hr: Vec<Vec<f64>> = indices.iter().map(|&i| z.normalize(self.samples[i].hr.values())).collect();
        let weather = if self.weather_channels() == 0 {
            None
        } else {
            let w = self.weather_channels();
            let m = self.lr_len();
            let mut data = Vec::with_capacity(indices.len() * w * m);
            for &i in indices {
                let track = self.samples[i]
                    .weather
                    .as_ref()
                    .ok_or_else(|| invalid(format!("sample {i} has no weather")))?;
                for ch in self.normalizer.normalize_weather(track)? {
                    data.extend(ch);
                }
            }
            Some(Tensor::new(Shape::new(indices.len(), w, m), data)?)
        };
        Ok(Batch {
            lr: Tensor::from_signals(&lr)?,
            weather,
            hr: Tensor::from_signals(&hr)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(weather: bool) -> RunConfig {
        RunConfig {
            households: 2,
            days_per_household: 5,
            weather,
            ..RunConfig::default()
        }
    }

    #[test]
    fn synthetic_dataset_shapes() {
        let d = Dataset::prepare(&tiny(true)).unwrap();
        assert_eq!(d.samples.len(), 10);
        assert_eq!((d.hr_len(), d.lr_len()), (288, 48));
        assert_eq!(d.weather_channels(), 5);
        assert_eq!(d.split.train.len() + d.split.val.len() + d.split.test.len(), 10);
        let b = d.batch(&d.split.train[..3]).unwrap();
        assert_eq!(b.lr.shape(), Shape::new(3, 1, 48));
        assert_eq!(b.hr.shape(), Shape::new(3, 1, 288));
        assert_eq!(b.weather.unwrap().shape(), Shape::new(3, 5, 48));
    }

    #[test]
    fn weather_off_drops_channels() {
        let d = Dataset::prepare(&tiny(false)).unwrap();
        assert_eq!(d.weather_channels(), 0);
        assert!(d.batch(&[0]).unwrap().weather.is_none());
    }

    #[test]
    fn noiseless_pairs_are_block_means() {
        let d = Dataset::prepare(&tiny(false)).unwrap();
        let s = &d.samples[0];
        assert_eq!(s.lr.values(), crate::data::block_mean(s.hr.values(), 6).unwrap());
    }

    #[test]
    fn training_split_is_standardized() {
        let d = Dataset::prepare(&tiny(false)).unwrap();
        let b = d.batch(&d.split.train).unwrap();
        let n = b.hr.numel() as f64;
        let mean = b.hr.data().iter().sum::<f64>() / n;
        let var = b.hr.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9);
    }
}

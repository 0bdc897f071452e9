use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::losses::{LossWeights, PoolConfig};
use crate::networks::{strides_for_alpha, DiscriminatorConfig, GeneratorConfig, PolisherConfig};
use crate::signal::AdamConfig;

/// Every knob of a run. Serialized as flat `key = value` lines; the same keys
/// are accepted as command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: usize,
    pub epochs_gan: usize,
    pub epochs_polish: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_polish: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k_max: usize,
    pub s_max: usize,
    pub leaky_slope: f64,
    pub noise_var: f64,
    pub weather: bool,
    pub seed: u64,
    pub shuffle: bool,
    pub d_steps: usize,
    pub checkpoint_every: usize,
    pub features: usize,
    pub residual_blocks: usize,
    pub polisher_features: usize,
    pub polisher_blocks: usize,
    pub input_skip: bool,
    pub households: usize,
    pub days_per_household: usize,
    pub hr_period: u32,
    pub rdp_fraction: f64,
    pub spectral_bins: usize,
    pub data: Option<PathBuf>,
    pub weather_data: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 6,
            epochs_gan: 30,
            epochs_polish: 30,
            batch_size: 32,
            lr: 1e-4,
            lr_polish: 1e-4,
            beta1: 0.99,
            beta2: 0.999,
            lambda1: 0.05,
            lambda2: 0.5,
            k_max: 3,
            s_max: 1,
            leaky_slope: 0.2,
            noise_var: 0.0,
            weather: true,
            seed: 2022,
            shuffle: true,
            d_steps: 1,
            checkpoint_every: 10,
            features: 64,
            residual_blocks: 4,
            polisher_features: 32,
            polisher_blocks: 2,
            input_skip: true,
            households: 20,
            days_per_household: 100,
            hr_period: 5,
            rdp_fraction: 0.05,
            spectral_bins: 24,
            data: None,
            weather_data: None,
            out_dir: PathBuf::from("runs/default"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("`{key}`: cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    /// Recognized keys, in serialization order.
    pub const KEYS: &'static [&'static str] = &[
        "alpha",
        "epochs_gan",
        "epochs_polish",
        "batch_size",
        "lr",
        "lr_polish",
        "beta1",
        "beta2",
        "lambda1",
        "lambda2",
        "k_max",
        "s_max",
        "leaky_slope",
        "noise_var",
        "weather",
        "seed",
        "shuffle",
        "d_steps",
        "checkpoint_every",
        "features",
        "residual_blocks",
        "polisher_features",
        "polisher_blocks",
        "input_skip",
        "households",
        "days_per_household",
        "hr_period",
        "rdp_fraction",
        "spectral_bins",
        "data",
        "weather_data",
        "out_dir",
    ];

    /// Sets one key. Dashes in `key` are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "alpha" => self.alpha = parse(k, value)?,
            "epochs_gan" => self.epochs_gan = parse(k, value)?,
            "epochs_polish" => self.epochs_polish = parse(k, value)?,
            "batch_size" => self.batch_size = parse(k, value)?,
            "lr" => self.lr = parse(k, value)?,
            "lr_polish" => self.lr_polish = parse(k, value)?,
            "beta1" => self.beta1 = parse(k, value)?,
            "beta2" => self.beta2 = parse(k, value)?,
            "lambda1" => self.lambda1 = parse(k, value)?,
            "lambda2" => self.lambda2 = parse(k, value)?,
            "k_max" => self.k_max = parse(k, value)?,
            "s_max" => self.s_max = parse(k, value)?,
            "leaky_slope" => self.leaky_slope = parse(k, value)?,
            "noise_var" => self.noise_var = parse(k, value)?,
            "weather" => self.weather = parse_bool(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "shuffle" => self.shuffle = parse_bool(k, value)?,
            "d_steps" => self.d_steps = parse(k, value)?,
            "checkpoint_every" => self.checkpoint_every = parse(k, value)?,
            "features" => self.features = parse(k, value)?,
            "residual_blocks" => self.residual_blocks = parse(k, value)?,
            "polisher_features" => self.polisher_features = parse(k, value)?,
            "polisher_blocks" => self.polisher_blocks = parse(k, value)?,
            "input_skip" => self.input_skip = parse_bool(k, value)?,
            "households" => self.households = parse(k, value)?,
            "days_per_household" => self.days_per_household = parse(k, value)?,
            "hr_period" => self.hr_period = parse(k, value)?,
            "rdp_fraction" => self.rdp_fraction = parse(k, value)?,
            "spectral_bins" => self.spectral_bins = parse(k, value)?,
            "data" => self.data = optional_path(value),
            "weather_data" => self.weather_data = optional_path(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        Some(match key.replace('-', "_").as_str() {
            "alpha" => self.alpha.to_string(),
            "epochs_gan" => self.epochs_gan.to_string(),
            "epochs_polish" => self.epochs_polish.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "lr" => self.lr.to_string(),
            "lr_polish" => self.lr_polish.to_string(),
            "beta1" => self.beta1.to_string(),
            "beta2" => self.beta2.to_string(),
            "lambda1" => self.lambda1.to_string(),
            "lambda2" => self.lambda2.to_string(),
            "k_max" => self.k_max.to_string(),
            "s_max" => self.s_max.to_string(),
            "leaky_slope" => self.leaky_slope.to_string(),
            "noise_var" => self.noise_var.to_string(),
            "weather" => self.weather.to_string(),
            "seed" => self.seed.to_string(),
            "shuffle" => self.shuffle.to_string(),
            "d_steps" => self.d_steps.to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            "features" => self.features.to_string(),
            "residual_blocks" => self.residual_blocks.to_string(),
            "polisher_features" => self.polisher_features.to_string(),
            "polisher_blocks" => self.polisher_blocks.to_string(),
            "input_skip" => self.input_skip.to_string(),
            "households" => self.households.to_string(),
            "days_per_household" => self.days_per_household.to_string(),
            "hr_period" => self.hr_period.to_string(),
            "rdp_fraction" => self.rdp_fraction.to_string(),
            "spectral_bins" => self.spectral_bins.to_string(),
            "data" => path(&self.data),
            "weather_data" => path(&self.weather_data),
            "out_dir" => self.out_dir.display().to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_kv(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_kv(&std::fs::read_to_string(path)?)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("listed key"));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_kv())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        strides_for_alpha(self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if !(self.lr > 0.0 && self.lr_polish > 0.0) {
            return fail("learning rates must be positive".into());
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return fail("Adam betas must lie in [0, 1)".into());
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return fail("loss weights must be >= 0".into());
        }
        if self.k_max == 0 || self.s_max == 0 {
            return fail("pooling kernel and stride must be positive".into());
        }
        if !(self.noise_var >= 0.0) {
            return fail("noise_var must be >= 0".into());
        }
        if self.d_steps == 0 {
            return fail("d_steps must be positive".into());
        }
        if self.hr_period == 0 || 1440 % (self.hr_period as usize * self.alpha) != 0 {
            return fail(format!(
                "a day must split evenly into {}-minute low-resolution intervals",
                self.hr_period as usize * self.alpha
            ));
        }
        if !(self.rdp_fraction >= 0.0) || self.spectral_bins == 0 {
            return fail("metric settings out of range".into());
        }
        self.generator_config(0)?.validate()?;
        self.polisher_config().validate()?;
        self.discriminator_config().validate()?;
        Ok(())
    }

    pub fn hr_len(&self) -> usize {
        1440 / self.hr_period as usize
    }

    pub fn lr_len(&self) -> usize {
        self.hr_len() / self.alpha
    }

    pub fn generator_config(&self, weather_channels: usize) -> Result<GeneratorConfig> {
        Ok(GeneratorConfig {
            in_channels: 1 + weather_channels,
            features: self.features,
            residual_blocks: self.residual_blocks,
            outer_kernel: 9,
            inner_kernel: 3,
            strides: strides_for_alpha(self.alpha)?,
            input_skip: self.input_skip,
        })
    }

    pub fn discriminator_config(&self) -> DiscriminatorConfig {
        DiscriminatorConfig {
            leaky_slope: self.leaky_slope,
            ..DiscriminatorConfig::new(self.hr_len())
        }
    }

    pub fn polisher_config(&self) -> PolisherConfig {
        PolisherConfig {
            features: self.polisher_features,
            residual_blocks: self.polisher_blocks,
            ..PolisherConfig::default()
        }
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            adversarial: self.lambda1,
            feature: self.lambda2,
        }
    }

    pub fn pool(&self) -> PoolConfig {
        PoolConfig {
            kernel: self.k_max,
            stride: self.s_max,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            ..AdamConfig::default()
        }
    }

    pub fn adam_polish(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr_polish,
            ..self.adam()
        }
    }

    /// Full-scale hyperparameters: the 300 + 300 epoch schedule and
    /// measurement noise of variance 0.01 on the low-resolution input.
    pub fn full_scale() -> Self {
        Self {
            epochs_gan: 300,
            epochs_polish: 300,
            noise_var: 0.01,
            ..Self::default()
        }
    }
}

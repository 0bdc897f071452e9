use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MINUTES_PER_DAY: u32 = 1440;

/// One household-day of power readings in kW at a fixed sampling period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub household_id: String,
    pub day: i64,
    pub period_min: u32,
    values: Vec<f64>,
}

impl LoadProfile {
    /// Builds a profile; values must be finite and nonnegative.
    pub fn new(household_id: impl Into<String>, day: i64, period_min: u32, values: Vec<f64>) -> Result<Self> {
        if period_min == 0 {
            return Err(invalid("sampling period must be positive"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(invalid(format!(
                "load value {v} at index {i} is negative or non-finite"
            )));
        }
        Ok(Self {
            household_id: household_id.into(),
            day,
            period_min,
            values,
        })
    }

    /// Unlabelled profile, handy for tests and examples.
    pub fn anonymous(period_min: u32, values: Vec<f64>) -> Result<Self> {
        Self::new("", 0, period_min, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the profile spans exactly midnight to midnight.
    pub fn is_daily(&self) -> bool {
        self.values.len() as u64 * u64::from(self.period_min) == u64::from(MINUTES_PER_DAY)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Same identity, new values and period; negative values are clamped to 0.
    pub fn with_values(&self, period_min: u32, values: Vec<f64>) -> Self {
        Self {
            household_id: self.household_id.clone(),
            day: self.day,
            period_min,
            values: values.into_iter().map(|v| v.max(0.0)).collect(),
        }
    }
}

/// Indices of profiles whose peak exceeds `multiple` times the corpus median peak.
pub fn flag_abnormal(profiles: &[LoadProfile], multiple: f64) -> Vec<usize> {
    if profiles.is_empty() {
        return Vec::new();
    }
    let mut peaks: Vec<f64> = profiles.iter().map(LoadProfile::peak).collect();
    peaks.sort_by(f64::total_cmp);
    let mid = peaks.len() / 2;
    let median = if peaks.len() % 2 == 0 {
        0.5 * (peaks[mid - 1] + peaks[mid])
    } else {
        peaks[mid]
    };
    profiles
        .iter()
        .enumerate()
        .filter(|(_, p)| p.peak() > multiple * median)
        .map(|(i, _)| i)
        .collect()
}

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::LoadProfile;
use crate::error::{invalid, Result};

/// Means of consecutive non-overlapping blocks of `factor` samples.
pub fn block_mean(values: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 || values.len() % factor != 0 {
        return Err(invalid(format!(
            "scale factor {factor} does not divide profile length {}",
            values.len()
        )));
    }
    Ok(values
        .chunks_exact(factor)
        .map(|c| c.iter().sum::<f64>() / factor as f64)
        .collect())
}

/// Interval-averages a high-resolution profile and adds i.i.d. Gaussian
/// measurement noise of variance `noise_var` to each low-resolution point.
///
/// Noisy means are clamped at zero so the result remains a valid load.
pub fn downsample<R: Rng + ?Sized>(
    hr: &LoadProfile,
    factor: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<LoadProfile> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(invalid(format!("noise variance {noise_var} must be >= 0")));
    }
    let mut lr = block_mean(hr.values(), factor)?;
    if noise_var > 0.0 {
        let normal = Normal::new(0.0, noise_var.sqrt()).expect("finite std");
        for v in &mut lr {
            *v += normal.sample(rng);
        }
    }
    Ok(hr.with_values(hr.period_min * factor as u32, lr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn exact_block_means() {
        let hr = LoadProfile::anonymous(10, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let lr = downsample(&hr, 3, 0.0, &mut rng::stream(0, "t")).unwrap();
        assert_eq!(lr.values(), &[2.0, 5.0]);
        assert_eq!(lr.period_min, 30);
    }

    #[test]
    fn constant_stays_constant() {
        let hr = LoadProfile::anonymous(5, vec![1.25; 288]).unwrap();
        for a in [2, 3, 6, 12] {
            let lr = downsample(&hr, a, 0.0, &mut rng::stream(0, "t")).unwrap();
            assert!(lr.values().iter().all(|&v| v == 1.25));
        }
    }

    #[test]
    fn factor_six_maps_5min_to_30min() {
        let hr = LoadProfile::anonymous(5, vec![0.5; 288]).unwrap();
        let lr = downsample(&hr, 6, 0.01, &mut rng::stream(1, "t")).unwrap();
        assert_eq!(lr.len(), 48);
        assert_eq!(lr.period_min, 30);
        assert!(lr.is_daily());
    }

    #[test]
    fn non_dividing_factor_rejected() {
        let hr = LoadProfile::anonymous(5, vec![0.5; 10]).unwrap();
        assert!(downsample(&hr, 3, 0.0, &mut rng::stream(0, "t")).is_err());
    }

    #[test]
    fn noisy_points_never_negative() {
        let hr = LoadProfile::anonymous(5, vec![0.0; 288]).unwrap();
        let lr = downsample(&hr, 6, 0.01, &mut rng::stream(3, "t")).unwrap();
        assert!(lr.values().iter().all(|&v| v >= 0.0));
        assert!(lr.values().iter().any(|&v| v > 0.0));
    }
}

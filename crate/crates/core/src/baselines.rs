//! Linear-interpolation upsampling and the content-only CNN setup.

use crate::data::LoadProfile;
use crate::error::{invalid, Result};
use crate::losses::LossWeights;
use crate::networks::GeneratorConfig;

/// Piecewise-linear interpolation through each low-resolution value placed at
/// the centre of its block, held flat over the outer half-blocks. Output
/// length is `alpha * values.len()`.
pub fn lerp_values(values: &[f64], alpha: usize) -> Result<Vec<f64>> {
    if alpha < 2 {
        return Err(invalid(format!("scale factor {alpha} must be >= 2")));
    }
    if values.is_empty() {
        return Err(invalid("cannot interpolate an empty profile"));
    }
    let m = values.len();
    let a = alpha as f64;
    let centre = |j: usize| j as f64 * a + (a - 1.0) / 2.0;
    let mut out = Vec::with_capacity(m * alpha);
    for i in 0..m * alpha {
        let x = i as f64;
        let v = if x <= centre(0) {
            values[0]
        } else if x >= centre(m - 1) {
            values[m - 1]
        } else {
            let j = ((x - centre(0)) / a).floor() as usize;
            let t = (x - centre(j)) / a;
            values[j] + t * (values[j + 1] - values[j])
        };
        out.push(v);
    }
    Ok(out)
}

pub fn lerp_upsample(lr: &LoadProfile, alpha: usize) -> Result<LoadProfile> {
    if alpha < 2 || lr.period_min as usize % alpha != 0 {
        return Err(invalid(format!(
            "scale factor {alpha} must be >= 2 and divide the {}-minute period",
            lr.period_min
        )));
    }
    let values = lerp_values(lr.values(), alpha)?;
    Ok(lr.with_values(lr.period_min / alpha as u32, values))
}

/// Training setup for the content-only baseline: the GAN generator's
/// architecture with adversarial and feature terms switched off.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnBaseline {
    pub generator: GeneratorConfig,
    pub weights: LossWeights,
}

pub fn cnn_baseline_config(generator: &GeneratorConfig) -> Result<CnnBaseline> {
    generator.validate()?;
    Ok(CnnBaseline {
        generator: generator.clone(),
        weights: LossWeights::CONTENT_ONLY,
    })
}

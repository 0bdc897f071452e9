//! Point-wise and shape-based reconstruction metrics.
//!
//! All four per-profile metrics take `(generated, truth)` and return a
//! nonnegative value that is zero on identical inputs.

mod dft;
mod rdp;
mod report;
mod wasserstein;

pub use dft::{dft_amplitude, dft_amplitude_naive, dft_fast, dft_naive};
pub use rdp::{perpendicular_distance, rdp_simplify, Polyline};
pub use report::{
    build_report, rounded_percent, MethodResults, MetricKind, MetricReport, MetricSet,
    ProfileMetrics,
};
pub use wasserstein::{wasserstein_1d, wasserstein_per_axis};

use crate::error::{invalid, Error, Result};

/// Fraction of the reference range used as the default simplification tolerance.
pub const DEFAULT_RDP_FRACTION: f64 = 0.05;

/// Number of low-frequency amplitude bins used as distribution features.
pub const DEFAULT_SPECTRAL_BINS: usize = 24;

fn same_len(op: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { op, left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(invalid(format!("{op}: empty profile")));
    }
    Ok(())
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len("mse", a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

fn max(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Peak load error `|max(gen) - max(truth)|`.
pub fn ple(generated: &[f64], truth: &[f64]) -> Result<f64> {
    if generated.is_empty() || truth.is_empty() {
        return Err(invalid("ple: empty profile"));
    }
    Ok((max(generated) - max(truth)).abs())
}

/// Frequency component error: mean absolute difference of amplitude spectra.
pub fn fce(generated: &[f64], truth: &[f64]) -> Result<f64> {
    same_len("fce", generated, truth)?;
    let ag = dft_amplitude(generated);
    let at = dft_amplitude(truth);
    Ok(ag.iter().zip(&at).map(|(x, y)| (x - y).abs()).sum::<f64>() / generated.len() as f64)
}

/// Default tolerance for [`cpe`]: a fixed fraction of the reference range.
pub fn default_rdp_epsilon(truth: &[f64]) -> f64 {
    let lo = truth.iter().copied().fold(f64::INFINITY, f64::min);
    DEFAULT_RDP_FRACTION * (max(truth) - lo)
}

/// Critical point error: difference in retained-point counts after
/// simplification with a shared tolerance, divided by the profile length.
/// `epsilon = None` uses [`default_rdp_epsilon`] of `truth`.
pub fn cpe(generated: &[f64], truth: &[f64], epsilon: Option<f64>) -> Result<f64> {
    same_len("cpe", generated, truth)?;
    let eps = epsilon.unwrap_or_else(|| default_rdp_epsilon(truth));
    let g = rdp_simplify(generated, eps)?.len() as f64;
    let t = rdp_simplify(truth, eps)?.len() as f64;
    Ok((g - t).abs() / generated.len() as f64)
}

/// The first `bins` DFT amplitudes, normalized by length.
pub fn spectral_features(x: &[f64], bins: usize) -> Vec<f64> {
    let n = x.len().max(1) as f64;
    dft_amplitude(x).into_iter().take(bins).map(|a| a / n).collect()
}

/// Mean over spectral axes of the per-axis `W1` between two profile sets.
pub fn spectral_wasserstein(generated: &[Vec<f64>], truth: &[Vec<f64>], bins: usize) -> Result<f64> {
    let fg: Vec<Vec<f64>> = generated.iter().map(|p| spectral_features(p, bins)).collect();
    let ft: Vec<Vec<f64>> = truth.iter().map(|p| spectral_features(p, bins)).collect();
    let per_axis = wasserstein_per_axis(&fg, &ft)?;
    Ok(per_axis.iter().sum::<f64>() / per_axis.len() as f64)
}

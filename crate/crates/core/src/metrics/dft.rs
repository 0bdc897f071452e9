//! Amplitude spectra with the unnormalized forward convention
//! `X_k = sum_n x_n exp(-2 pi i k n / N)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// O(N²) reference transform.
pub fn dft_naive(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| {
                    // reduce k*t mod n first to keep the angle small
                    let phase = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    Complex64::from_polar(v, phase)
                })
                .sum()
        })
        .collect()
}

/// Mixed-radix fast transform for any length.
pub fn dft_fast(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// `|X_k|` for `k = 0..N`.
pub fn dft_amplitude(x: &[f64]) -> Vec<f64> {
    dft_fast(x).iter().map(|c| c.norm()).collect()
}

pub fn dft_amplitude_naive(x: &[f64]) -> Vec<f64> {
    dft_naive(x).iter().map(|c| c.norm()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_dc_only() {
        let a = dft_amplitude(&[2.5; 12]);
        assert!((a[0] - 30.0).abs() < 1e-12);
        assert!(a[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn cosine_lands_on_mirror_bins() {
        let n = 48;
        let k = 5;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * (k * t) as f64 / n as f64).cos()).collect();
        let a = dft_amplitude(&x);
        for (bin, v) in a.iter().enumerate() {
            if bin == k || bin == n - k {
                assert!((v - n as f64 / 2.0).abs() < 1e-9);
            } else {
                assert!(v.abs() < 1e-9, "bin {bin}: {v}");
            }
        }
    }

    #[test]
    fn parseval() {
        let x: Vec<f64> = (0..288).map(|t| ((t * 7919) % 113) as f64 / 13.0).collect();
        let spec: f64 = dft_amplitude(&x).iter().map(|a| a * a).sum();
        let time: f64 = x.iter().map(|v| v * v).sum::<f64>() * x.len() as f64;
        assert!((spec - time).abs() / time < 1e-6);
    }
}

//! Point-wise and shape-based metrics on a profile, a one-slot time shift of
//! it, and its linear-interpolation reconstruction.

use profilesr::baselines::lerp_values;
use profilesr::data::{block_mean, synthesize_profile, SynthSpec};
use profilesr::metrics::{cpe, dft_amplitude, fce, mse, ple, rdp_simplify, spectral_wasserstein, default_rdp_epsilon};
use profilesr::rng;

fn main() -> profilesr::Result<()> {
    let (hr, _) = synthesize_profile(&SynthSpec::default(), "h000", 200, &mut rng::stream(5, "example/metrics"))?;
    let truth = hr.values().to_vec();
    let mut shifted = truth.clone();
    shifted.rotate_right(1);
    let lerp = lerp_values(&block_mean(&truth, 6)?, 6)?;

    println!("candidate,MSE,PLE,FCE,CPE");
    for (name, x) in [("shifted", &shifted), ("lerp", &lerp)] {
        println!(
            "{name},{:.4},{:.4},{:.4},{:.4}",
            mse(x, &truth)?,
            ple(x, &truth)?,
            fce(x, &truth)?,
            cpe(x, &truth, None)?
        );
    }

    let eps = default_rdp_epsilon(&truth);
    let outline = rdp_simplify(&truth, eps)?;
    println!("RDP outline at eps {eps:.3}: {} of {} points", outline.len(), truth.len());
    let amp = dft_amplitude(&truth);
    println!("DC amplitude {:.3}, first harmonic {:.3}", amp[0], amp[1]);
    let w1 = spectral_wasserstein(&[lerp.clone(), shifted.clone()], &[truth.clone(), truth.clone()], 24)?;
    println!("spectral W1 of (lerp, shifted) vs truth: {w1:.4}");
    Ok(())
}

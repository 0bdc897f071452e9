//! Interval averaging from 5-minute to 30-minute resolution, with and
//! without measurement noise.

use profilesr::data::{downsample, synthesize_profile, SynthSpec};
use profilesr::rng;

fn main() -> profilesr::Result<()> {
    let mut r = rng::stream(1, "example/downsample");
    let (hr, _) = synthesize_profile(&SynthSpec::default(), "h000", 180, &mut r)?;
    let clean = downsample(&hr, 6, 0.0, &mut r)?;
    let noisy = downsample(&hr, 6, 0.01, &mut r)?;

    println!("high-res: {} points at {} min, mean {:.4} kW", hr.len(), hr.period_min, hr.mean());
    println!("low-res:  {} points at {} min, mean {:.4} kW", clean.len(), clean.period_min, clean.mean());
    println!("slot,clean_kw,noisy_kw");
    for (i, (c, n)) in clean.values().iter().zip(noisy.values()).enumerate() {
        println!("{i},{c:.4},{n:.4}");
    }
    Ok(())
}

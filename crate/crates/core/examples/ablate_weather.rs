//! Identical runs with and without weather conditioning.

use profilesr::harness::{ablate_weather, comparison_table, RunConfig};

fn main() -> profilesr::Result<()> {
    let config = RunConfig {
        households: 2,
        days_per_household: 10,
        features: 4,
        residual_blocks: 1,
        polisher_features: 4,
        polisher_blocks: 1,
        epochs_gan: 2,
        epochs_polish: 2,
        batch_size: 8,
        ..RunConfig::default()
    };
    let (on, off) = ablate_weather(&config)?;
    println!(
        "input channels: {} with weather, {} without",
        on.gan.generator_config.in_channels, off.gan.generator_config.in_channels
    );
    print!(
        "{}",
        comparison_table(&[("weather_on".into(), &on.report), ("weather_off".into(), &off.report)])
    );
    Ok(())
}

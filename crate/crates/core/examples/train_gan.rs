//! Stage-one adversarial training on a small synthetic corpus, printing the
//! per-epoch log.

use profilesr::harness::{train_stage1, Dataset, RunConfig};

fn main() -> profilesr::Result<()> {
    let config = RunConfig {
        households: 4,
        days_per_household: 10,
        features: 8,
        residual_blocks: 1,
        epochs_gan: 5,
        batch_size: 8,
        lr: 1e-3,
        ..RunConfig::default()
    };
    let data = Dataset::prepare(&config)?;
    println!(
        "{} days ({} train), {} -> {} points, {} weather channels",
        data.samples.len(),
        data.split.train.len(),
        data.lr_len(),
        data.hr_len(),
        data.weather_channels()
    );
    let stage1 = train_stage1(&config, &data, None)?;
    print!("{}", stage1.log.to_csv());
    println!("generator parameters: {}", stage1.generator.param_count());
    Ok(())
}

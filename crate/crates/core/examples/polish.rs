//! Trains the polisher on frozen generator outputs and shows how the
//! outline and switching terms evolve.

use profilesr::harness::{train_stage1, train_stage2, Dataset, RunConfig};

fn main() -> profilesr::Result<()> {
    let config = RunConfig {
        households: 4,
        days_per_household: 10,
        features: 8,
        residual_blocks: 1,
        polisher_features: 8,
        polisher_blocks: 1,
        epochs_gan: 3,
        epochs_polish: 8,
        batch_size: 8,
        lr: 1e-3,
        lr_polish: 1e-3,
        ..RunConfig::default()
    };
    let data = Dataset::prepare(&config)?;
    let stage1 = train_stage1(&config, &data, None)?;
    let stage2 = train_stage2(&config, &data, &stage1.generator_config, &stage1.generator, None)?;
    print!("{}", stage2.log.to_csv());
    Ok(())
}

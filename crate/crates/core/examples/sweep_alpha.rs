//! One toy run per scale factor, compared side by side.

use profilesr::harness::{comparison_table, sweep_alpha, RunConfig};
use profilesr::networks::strides_for_alpha;

fn main() -> profilesr::Result<()> {
    let alphas = [3, 6, 12];
    for a in alphas {
        println!("alpha {a}: transposed-conv strides {:?}", strides_for_alpha(a)?);
    }
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
    let runs = sweep_alpha(&config, &alphas)?;
    let rows: Vec<(String, _)> = runs.iter().map(|(a, e)| (format!("alpha={a}"), &e.report)).collect();
    print!("{}", comparison_table(&rows));
    Ok(())
}

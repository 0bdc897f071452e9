//! Full pipeline at toy scale: train, polish, evaluate all four methods and
//! write the report.
//!
//! `cargo run --release --example evaluate -- [out_dir]`

use profilesr::harness::{run_experiment, RunConfig};

fn main() -> profilesr::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("profilesr_eval").display().to_string());
    let config = RunConfig {
        households: 4,
        days_per_household: 15,
        features: 8,
        residual_blocks: 1,
        polisher_features: 8,
        polisher_blocks: 1,
        epochs_gan: 4,
        epochs_polish: 4,
        batch_size: 8,
        lr: 1e-3,
        lr_polish: 1e-3,
        ..RunConfig::default()
    };
    let experiment = run_experiment(&config, None)?;
    print!("{}", experiment.report.to_table());
    experiment.save(std::path::Path::new(&out))?;
    println!("saved to {out}");
    Ok(())
}

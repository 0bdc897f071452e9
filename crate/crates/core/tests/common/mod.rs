//! Helpers shared by the integration test targets.

#![allow(dead_code)]

pub mod gradcheck;

use profilesr::harness::RunConfig;

/// Smallest configuration that still exercises every stage.
pub fn tiny_config(days: usize) -> RunConfig {
    RunConfig {
        households: 2,
        days_per_household: days / 2,
        features: 4,
        residual_blocks: 1,
        polisher_features: 4,
        polisher_blocks: 1,
        batch_size: 4,
        epochs_gan: 1,
        epochs_polish: 1,
        checkpoint_every: 0,
        ..RunConfig::default()
    }
}

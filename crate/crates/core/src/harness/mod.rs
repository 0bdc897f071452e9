//! Two-stage training, evaluation and experiment sweeps.
//!
//! A run is fully determined by its [`RunConfig`]: every random draw comes
//! from a stream derived from `seed`, so logs and checkpoints repeat bit for
//! bit on the same machine.

mod config;
mod dataset;
mod evaluate;
mod train;

pub use config::RunConfig;
pub use dataset::{Batch, Dataset, Sample, ABNORMAL_PEAK_MULTIPLE};
pub use evaluate::{
    ablate_weather, comparison_table, evaluate, evaluate_outputs, method_outputs, run_experiment, run_on,
    sweep_alpha, Experiment, MetricConfig, Models, CNN, GAN_POLISHED, GAN_UNPOLISHED, LERP,
};
pub use train::{
    generator_outputs, train_cnn_baseline, train_stage1, train_stage2, Stage1, Stage2, TrainLog, CNN_COLUMNS,
    STAGE1_COLUMNS, STAGE2_COLUMNS,
};

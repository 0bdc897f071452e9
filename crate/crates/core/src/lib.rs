//! Two-stage super-resolution for smart-meter load profiles.
//!
//! A low-resolution (interval-averaged) daily load profile is upsampled by a
//! convolutional generator trained adversarially against a 1-D discriminator,
//! then refined by a residual polishing network trained on envelope
//! (outline) and rate-of-change (switching) losses. Reconstructions are scored
//! with point-wise MSE and three shape metrics: peak load error, frequency
//! component error and critical point error.
//!
//! Module map:
//!
//! - [`signal`]: reverse-mode autodiff over `(batch, channel, length)` tensors,
//!   the layer set the networks need, and Adam.
//! - [`data`]: load profiles, weather tracks, synthetic corpus, downsampling,
//!   normalization, splits and CSV I/O.
//! - [`networks`]: generator, discriminator and polisher plus checkpoints.
//! - [`losses`]: content, adversarial, feature-matching, outline and switching
//!   objectives.
//! - [`metrics`]: MSE, PLE, FCE, CPE, Wasserstein distance and reports.
//! - [`baselines`]: linear interpolation and the MSE-only CNN setup.
//! - [`harness`]: two-stage training, evaluation and experiment sweeps.

pub mod baselines;
pub mod data;
pub mod error;
pub mod harness;
pub mod losses;
pub mod metrics;
pub mod networks;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};

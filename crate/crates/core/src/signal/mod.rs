//! Batched 1-D signals, a recording tape for reverse-mode differentiation,
//! and the optimizer.

mod adam;
pub mod kernels;
mod tape;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use kernels::BatchStats;
pub use tape::{sigmoid, Activation, Gradients, Tape, Var};
pub use tensor::{Shape, Tensor};

/// Variance floor added inside batch-norm square roots.
pub const BN_EPS: f64 = 1e-5;

/// Exponential-moving-average factor for running batch-norm statistics.
pub const BN_MOMENTUM: f64 = 0.1;

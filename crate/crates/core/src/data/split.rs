use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

/// Train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

/// Disjoint, exhaustive partition of day indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` with `seed` and cuts it by `fractions`.
///
/// Train and validation sizes are rounded; the test split takes the remainder.
pub fn split_dataset(n: usize, fractions: SplitFractions, seed: u64) -> Result<DatasetSplit> {
    let SplitFractions { train, val, test } = fractions;
    if [train, val, test].iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(invalid("split fractions must lie in [0, 1]"));
    }
    if (train + val + test - 1.0).abs() > 1e-9 {
        return Err(invalid(format!(
            "split fractions sum to {}, expected 1",
            train + val + test
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, "split"));
    let n_train = ((n as f64 * train).round() as usize).min(n);
    let n_val = ((n as f64 * val).round() as usize).min(n - n_train);
    let test_idx = idx.split_off(n_train + n_val);
    let val_idx = idx.split_off(n_train);
    Ok(DatasetSplit {
        train: idx,
        val: val_idx,
        test: test_idx,
    })
}

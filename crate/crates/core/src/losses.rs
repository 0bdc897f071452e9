//! Training objectives.
//!
//! Each loss exists twice: a direct evaluation on plain slices (used for
//! reporting and as a reference) and a graph builder on a [`Tape`] used for
//! training. Graph versions average per-sample losses over the batch.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::kernels::max_pool1d_forward;
use crate::signal::{Tape, Tensor, Var};

/// Guard added inside every logarithm of a probability.
pub const LOG_EPS: f64 = 1e-12;

/// Weights of the adversarial and feature-matching terms in the generator loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub adversarial: f64,
    pub feature: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            adversarial: 0.05,
            feature: 0.5,
        }
    }
}

impl LossWeights {
    /// Content loss only: the MSE-trained CNN baseline.
    pub const CONTENT_ONLY: LossWeights = LossWeights {
        adversarial: 0.0,
        feature: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.adversarial >= 0.0 && self.feature >= 0.0) {
            return Err(invalid("loss weights must be >= 0"));
        }
        Ok(())
    }
}

/// Max-pooling window of the outline and switching losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub kernel: usize,
    pub stride: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            kernel: 3,
            stride: 1,
        }
    }
}

fn same_len(op: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            op,
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(invalid(format!("{op} on empty profiles")));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn pooled(values: &[f64], pool: PoolConfig) -> Result<Vec<f64>> {
    Ok(max_pool1d_forward(&Tensor::from_signal(values), pool.kernel, pool.stride)?
        .0
        .into_data())
}

/// Mean squared point-to-point distance.
pub fn content_loss(generated: &[f64], target: &[f64]) -> Result<f64> {
    same_len("content_loss", generated, target)?;
    Ok(sq_dist(generated, target) / generated.len() as f64)
}

/// Binary cross-entropy of the discriminator on one real and one fake score.
pub fn discriminator_loss(score_real: f64, score_fake: f64) -> f64 {
    -((score_real + LOG_EPS).ln() + (1.0 - score_fake + LOG_EPS).ln())
}

/// Non-saturating generator objective `-log D(G(x))`.
pub fn adversarial_loss(score_fake: f64) -> f64 {
    -(score_fake + LOG_EPS).ln()
}

/// Original minimax generator objective `log(1 - D(G(x)))`; tracked for the
/// training curves only.
pub fn saturating_adversarial_loss(score_fake: f64) -> f64 {
    (1.0 - score_fake + LOG_EPS).ln()
}

/// Sum over layers of squared Euclidean distances between feature maps.
pub fn feature_matching_loss(fake: &[Tensor], real: &[Tensor]) -> Result<f64> {
    if fake.len() != real.len() {
        return Err(Error::LengthMismatch {
            op: "feature_matching_loss",
            left: fake.len(),
            right: real.len(),
        });
    }
    let mut total = 0.0;
    for (f, r) in fake.iter().zip(real) {
        if f.shape() != r.shape() {
            return Err(Error::ShapeMismatch {
                op: "feature_matching_loss",
                left: f.shape(),
                right: r.shape(),
            });
        }
        total += sq_dist(f.data(), r.data());
    }
    Ok(total)
}

pub fn generator_loss(content: f64, adversarial: f64, feature: f64, weights: LossWeights) -> f64 {
    content + weights.adversarial * adversarial + weights.feature * feature
}

/// Envelope loss: squared distance of the upper (max-pooled) and lower
/// (max-pooled negation) envelopes, each divided by the profile length.
pub fn outline_loss(generated: &[f64], target: &[f64], pool: PoolConfig) -> Result<f64> {
    same_len("outline_loss", generated, target)?;
    let n = generated.len() as f64;
    let upper = sq_dist(&pooled(generated, pool)?, &pooled(target, pool)?);
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let lower = sq_dist(&pooled(&neg(generated), pool)?, &pooled(&neg(target), pool)?);
    Ok(upper / n + lower / n)
}

/// Rate-of-change loss on max-pooled absolute first differences, divided by
/// the profile length `N` (not `N - 1`).
pub fn switching_loss(generated: &[f64], target: &[f64], pool: PoolConfig) -> Result<f64> {
    same_len("switching_loss", generated, target)?;
    if generated.len() < 2 {
        return Err(invalid("switching_loss needs at least two points"));
    }
    let absdiff = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).collect::<Vec<_>>();
    let d = sq_dist(&pooled(&absdiff(generated), pool)?, &pooled(&absdiff(target), pool)?);
    Ok(d / generated.len() as f64)
}

pub fn polishing_loss(generated: &[f64], target: &[f64], pool: PoolConfig) -> Result<f64> {
    Ok(outline_loss(generated, target, pool)? + switching_loss(generated, target, pool)?)
}

/// Graph builders for the same objectives over batches `(B, C, N)`.
pub mod graph {
    use super::*;

    fn check_same(tape: &Tape, op: &'static str, a: Var, b: Var) -> Result<()> {
        if tape.shape(a) != tape.shape(b) {
            return Err(Error::ShapeMismatch {
                op,
                left: tape.shape(a),
                right: tape.shape(b),
            });
        }
        Ok(())
    }

    /// `sum((a - b)^2) / divisor`.
    fn scaled_sq_dist(tape: &mut Tape, a: Var, b: Var, divisor: f64) -> Result<Var> {
        let d = tape.sub(a, b)?;
        let sq = tape.square(d)?;
        let s = tape.sum(sq)?;
        tape.scale(s, 1.0 / divisor)
    }

    pub fn content_loss(tape: &mut Tape, generated: Var, target: Var) -> Result<Var> {
        check_same(tape, "content_loss", generated, target)?;
        let n = tape.value(generated).numel() as f64;
        scaled_sq_dist(tape, generated, target, n)
    }

    pub fn discriminator_loss(tape: &mut Tape, score_real: Var, score_fake: Var) -> Result<Var> {
        let batch = tape.value(score_real).numel() as f64;
        let lr = tape.log(score_real, LOG_EPS)?;
        let one_minus = tape.affine(score_fake, -1.0, 1.0)?;
        let lf = tape.log(one_minus, LOG_EPS)?;
        let sr = tape.sum(lr)?;
        let sf = tape.sum(lf)?;
        let both = tape.add(sr, sf)?;
        tape.scale(both, -1.0 / batch)
    }

    pub fn adversarial_loss(tape: &mut Tape, score_fake: Var) -> Result<Var> {
        let batch = tape.value(score_fake).numel() as f64;
        let l = tape.log(score_fake, LOG_EPS)?;
        let s = tape.sum(l)?;
        tape.scale(s, -1.0 / batch)
    }

    pub fn feature_matching_loss(tape: &mut Tape, fake: &[Var], real: &[Var]) -> Result<Var> {
        if fake.len() != real.len() || fake.is_empty() {
            return Err(Error::LengthMismatch {
                op: "feature_matching_loss",
                left: fake.len(),
                right: real.len(),
            });
        }
        let batch = tape.shape(fake[0]).batch as f64;
        let mut total: Option<Var> = None;
        for (&f, &r) in fake.iter().zip(real) {
            check_same(tape, "feature_matching_loss", f, r)?;
            let term = scaled_sq_dist(tape, f, r, batch)?;
            total = Some(match total {
                None => term,
                Some(t) => tape.add(t, term)?,
            });
        }
        Ok(total.expect("non-empty"))
    }

    pub fn generator_loss(tape: &mut Tape, content: Var, adversarial: Var, feature: Var, weights: LossWeights) -> Result<Var> {
        let a = tape.scale(adversarial, weights.adversarial)?;
        let f = tape.scale(feature, weights.feature)?;
        let af = tape.add(a, f)?;
        tape.add(content, af)
    }

    pub fn outline_loss(tape: &mut Tape, generated: Var, target: Var, pool: PoolConfig) -> Result<Var> {
        check_same(tape, "outline_loss", generated, target)?;
        let s = tape.shape(generated);
        let denom = (s.batch * s.channels * s.len) as f64;
        let gu = tape.max_pool1d(generated, pool.kernel, pool.stride)?;
        let tu = tape.max_pool1d(target, pool.kernel, pool.stride)?;
        let upper = scaled_sq_dist(tape, gu, tu, denom)?;
        let gn = tape.neg(generated)?;
        let tn = tape.neg(target)?;
        let gl = tape.max_pool1d(gn, pool.kernel, pool.stride)?;
        let tl = tape.max_pool1d(tn, pool.kernel, pool.stride)?;
        let lower = scaled_sq_dist(tape, gl, tl, denom)?;
        tape.add(upper, lower)
    }

    pub fn switching_loss(tape: &mut Tape, generated: Var, target: Var, pool: PoolConfig) -> Result<Var> {
        check_same(tape, "switching_loss", generated, target)?;
        let s = tape.shape(generated);
        let denom = (s.batch * s.channels * s.len) as f64;
        let mut envelope = |x: Var| -> Result<Var> {
            let d = tape.diff(x)?;
            let a = tape.abs(d)?;
            tape.max_pool1d(a, pool.kernel, pool.stride)
        };
        let ge = envelope(generated)?;
        let te = envelope(target)?;
        scaled_sq_dist(tape, ge, te, denom)
    }

    /// Returns `(total, outline, switching)`.
    pub fn polishing_loss(tape: &mut Tape, generated: Var, target: Var, pool: PoolConfig) -> Result<(Var, Var, Var)> {
        let o = outline_loss(tape, generated, target, pool)?;
        let s = switching_loss(tape, generated, target, pool)?;
        Ok((tape.add(o, s)?, o, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn content_by_definition() {
        let t = [1.0, 2.0, 3.0];
        assert_eq!(content_loss(&t, &t).unwrap(), 0.0);
        assert_eq!(content_loss(&[2.0, 3.0, 4.0], &t).unwrap(), 1.0);
        assert!(content_loss(&t, &[1.0]).is_err());
    }

    #[test]
    fn discriminator_limits() {
        assert!((discriminator_loss(0.5, 0.5) - 2.0 * LN2).abs() < 1e-9);
        assert!(discriminator_loss(1.0 - 1e-15, 1e-15) < 1e-9);
        assert!(discriminator_loss(0.9, 0.3) < discriminator_loss(0.6, 0.3));
        assert!(discriminator_loss(0.0, 1.0).is_finite());
    }

    #[test]
    fn adversarial_limits() {
        assert!((adversarial_loss(0.5) - LN2).abs() < 1e-9);
        assert!(adversarial_loss(1.0) < 1e-9);
        assert!(adversarial_loss(0.2) > adversarial_loss(0.3));
        assert!(adversarial_loss(0.0).is_finite());
    }

    #[test]
    fn feature_matching_unit_offsets() {
        let r = Tensor::from_signal(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let f = Tensor::from_signal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(feature_matching_loss(&[r.clone()], &[r.clone()]).unwrap(), 0.0);
        assert_eq!(feature_matching_loss(&[f], &[r]).unwrap(), 5.0);
    }

    #[test]
    fn generator_weighting() {
        let w = LossWeights::default();
        assert!((generator_loss(1.0, 2.0, 3.0, w) - 2.6).abs() < 1e-12);
        assert_eq!(generator_loss(0.7, 2.0, 3.0, LossWeights::CONTENT_ONLY), 0.7);
    }

    #[test]
    fn outline_constant_shift() {
        let t = [0.3, 1.7, 0.2, 2.5, 2.4, 0.9];
        let c = 0.75;
        let g: Vec<f64> = t.iter().map(|v| v + c).collect();
        let p = PoolConfig::default();
        assert_eq!(outline_loss(&t, &t, p).unwrap(), 0.0);
        assert!((outline_loss(&g, &t, p).unwrap() - 2.0 * c * c).abs() < 1e-12);
    }

    #[test]
    fn switching_ignores_level() {
        let t = [0.3, 1.7, 0.2, 2.5, 2.4, 0.9];
        let g: Vec<f64> = t.iter().map(|v| v + 3.0).collect();
        let p = PoolConfig::default();
        assert_eq!(switching_loss(&[1.0; 6], &[4.0; 6], p).unwrap(), 0.0);
        assert!(switching_loss(&g, &t, p).unwrap().abs() < 1e-24);
        let o = outline_loss(&g, &t, p).unwrap();
        assert!((polishing_loss(&g, &t, p).unwrap() - o).abs() < 1e-12);
    }
}

//! Forward and backward kernels on raw tensors.
//!
//! These are the numeric bodies behind the tape ops. They are exposed so
//! tests can check algebraic identities (e.g. the conv / transpose-conv
//! adjoint pair) without a tape in the way.

use crate::error::{Error, Result};
use crate::signal::{Shape, Tensor};

pub fn conv1d_out_len(len: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = len + 2 * padding;
    if stride == 0 || kernel == 0 || padded < kernel {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

fn check_bias(op: &'static str, bias: Option<&Tensor>, out_ch: usize) -> Result<()> {
    if let Some(b) = bias {
        if b.numel() != out_ch {
            return Err(Error::ShapeMismatch {
                op,
                left: Shape::channel_vector(out_ch),
                right: b.shape(),
            });
        }
    }
    Ok(())
}

/// Range of output positions `t` whose tap `t*stride + j - padding` lands
/// inside `[0, len)`.
#[inline]
fn tap_range(j: usize, len: usize, out_len: usize, stride: usize, padding: usize) -> (usize, usize) {
    let lo = if padding > j {
        (padding - j).div_ceil(stride)
    } else {
        0
    };
    let hi_excl = if len + padding > j {
        ((len + padding - j - 1) / stride + 1).min(out_len)
    } else {
        0
    };
    (lo, hi_excl.max(lo))
}

pub fn conv1d_forward(
    input: &Tensor,
    weight: &Tensor,
    bias: Option<&Tensor>,
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let xs = input.shape();
    let ws = weight.shape();
    let (out_ch, in_ch, k) = (ws.batch, ws.channels, ws.len);
    if xs.channels != in_ch {
        return Err(Error::ShapeMismatch {
            op: "conv1d",
            left: xs,
            right: ws,
        });
    }
    check_bias("conv1d", bias, out_ch)?;
    let out_len = conv1d_out_len(xs.len, k, stride, padding).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "conv1d: kernel {k} / stride {stride} / padding {padding} invalid for input {xs}"
        ))
    })?;
    let mut out = Tensor::zeros(Shape::new(xs.batch, out_ch, out_len));
    let x = input.data();
    let w = weight.data();
    let y = out.data_mut();
    for b in 0..xs.batch {
        for o in 0..out_ch {
            let yrow = &mut y[(b * out_ch + o) * out_len..][..out_len];
            if let Some(bias) = bias {
                yrow.fill(bias.data()[o]);
            }
            for i in 0..in_ch {
                let xrow = &x[(b * in_ch + i) * xs.len..][..xs.len];
                for j in 0..k {
                    let wv = w[(o * in_ch + i) * k + j];
                    let (lo, hi) = tap_range(j, xs.len, out_len, stride, padding);
                    for t in lo..hi {
                        yrow[t] += wv * xrow[t * stride + j - padding];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of `conv1d_forward` given the output gradient: `(dx, dw, db)`.
pub fn conv1d_backward(
    input: &Tensor,
    weight: &Tensor,
    grad_out: &[f64],
    stride: usize,
    padding: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let xs = input.shape();
    let ws = weight.shape();
    let (out_ch, in_ch, k) = (ws.batch, ws.channels, ws.len);
    let out_len = grad_out.len() / (xs.batch * out_ch);
    let x = input.data();
    let w = weight.data();
    let mut dx = vec![0.0; x.len()];
    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; out_ch];
    for b in 0..xs.batch {
        for o in 0..out_ch {
            let gy = &grad_out[(b * out_ch + o) * out_len..][..out_len];
            db[o] += gy.iter().sum::<f64>();
            for i in 0..in_ch {
                let base = (b * in_ch + i) * xs.len;
                for j in 0..k {
                    let widx = (o * in_ch + i) * k + j;
                    let wv = w[widx];
                    let (lo, hi) = tap_range(j, xs.len, out_len, stride, padding);
                    let mut acc = 0.0;
                    for t in lo..hi {
                        let xi = base + t * stride + j - padding;
                        acc += x[xi] * gy[t];
                        dx[xi] += wv * gy[t];
                    }
                    dw[widx] += acc;
                }
            }
        }
    }
    (dx, dw, db)
}

pub fn conv1d_transpose_forward(
    input: &Tensor,
    weight: &Tensor,
    bias: Option<&Tensor>,
    stride: usize,
) -> Result<Tensor> {
    let xs = input.shape();
    let ws = weight.shape();
    let (in_ch, out_ch, k) = (ws.batch, ws.channels, ws.len);
    if xs.channels != in_ch {
        return Err(Error::ShapeMismatch {
            op: "conv1d_transpose",
            left: xs,
            right: ws,
        });
    }
    if stride == 0 || k == 0 || xs.len == 0 {
        return Err(Error::InvalidArgument(format!(
            "conv1d_transpose: stride {stride} / kernel {k} invalid for input {xs}"
        )));
    }
    check_bias("conv1d_transpose", bias, out_ch)?;
    let out_len = (xs.len - 1) * stride + k;
    let mut out = Tensor::zeros(Shape::new(xs.batch, out_ch, out_len));
    let x = input.data();
    let w = weight.data();
    let y = out.data_mut();
    for b in 0..xs.batch {
        for o in 0..out_ch {
            let yrow = &mut y[(b * out_ch + o) * out_len..][..out_len];
            if let Some(bias) = bias {
                yrow.fill(bias.data()[o]);
            }
            for i in 0..in_ch {
                let xrow = &x[(b * in_ch + i) * xs.len..][..xs.len];
                let wrow = &w[(i * out_ch + o) * k..][..k];
                for (t, &xv) in xrow.iter().enumerate() {
                    let dst = &mut yrow[t * stride..t * stride + k];
                    for (d, &wv) in dst.iter_mut().zip(wrow) {
                        *d += wv * xv;
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn conv1d_transpose_backward(
    input: &Tensor,
    weight: &Tensor,
    grad_out: &[f64],
    stride: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let xs = input.shape();
    let ws = weight.shape();
    let (in_ch, out_ch, k) = (ws.batch, ws.channels, ws.len);
    let out_len = (xs.len - 1) * stride + k;
    let x = input.data();
    let w = weight.data();
    let mut dx = vec![0.0; x.len()];
    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; out_ch];
    for b in 0..xs.batch {
        for o in 0..out_ch {
            let gy = &grad_out[(b * out_ch + o) * out_len..][..out_len];
            db[o] += gy.iter().sum::<f64>();
            for i in 0..in_ch {
                let xbase = (b * in_ch + i) * xs.len;
                let wbase = (i * out_ch + o) * k;
                for t in 0..xs.len {
                    let g = &gy[t * stride..t * stride + k];
                    let xv = x[xbase + t];
                    let mut acc = 0.0;
                    for j in 0..k {
                        acc += w[wbase + j] * g[j];
                        dw[wbase + j] += xv * g[j];
                    }
                    dx[xbase + t] += acc;
                }
            }
        }
    }
    (dx, dw, db)
}

/// Batch statistics of one normalization call, per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    /// Biased (population) variance over `(batch, length)`.
    pub var: Vec<f64>,
    /// Number of elements reduced per channel.
    pub count: usize,
}

pub struct BatchNormForward {
    pub output: Tensor,
    pub normalized: Vec<f64>,
    pub inv_std: Vec<f64>,
    pub stats: BatchStats,
}

pub fn batch_norm_train_forward(
    input: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    eps: f64,
) -> Result<BatchNormForward> {
    let s = input.shape();
    check_channel_params("batch_norm", s, gamma, beta)?;
    let n = s.batch * s.len;
    if n == 0 {
        return Err(Error::InvalidArgument("batch_norm on empty input".into()));
    }
    let x = input.data();
    let mut mean = vec![0.0; s.channels];
    let mut var = vec![0.0; s.channels];
    for c in 0..s.channels {
        let mut sum = 0.0;
        for b in 0..s.batch {
            sum += input.row(b, c).iter().sum::<f64>();
        }
        let m = sum / n as f64;
        let mut sq = 0.0;
        for b in 0..s.batch {
            sq += input.row(b, c).iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        }
        mean[c] = m;
        var[c] = sq / n as f64;
    }
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    let mut normalized = vec![0.0; x.len()];
    let mut out = Tensor::zeros(s);
    let y = out.data_mut();
    for b in 0..s.batch {
        for c in 0..s.channels {
            let off = (b * s.channels + c) * s.len;
            let (g, bt) = (gamma.data()[c], beta.data()[c]);
            for t in 0..s.len {
                let xh = (x[off + t] - mean[c]) * inv_std[c];
                normalized[off + t] = xh;
                y[off + t] = g * xh + bt;
            }
        }
    }
    Ok(BatchNormForward {
        output: out,
        normalized,
        inv_std,
        stats: BatchStats {
            mean,
            var,
            count: n,
        },
    })
}

fn check_channel_params(op: &'static str, s: Shape, gamma: &Tensor, beta: &Tensor) -> Result<()> {
    for p in [gamma, beta] {
        if p.numel() != s.channels {
            return Err(Error::ShapeMismatch {
                op,
                left: s,
                right: p.shape(),
            });
        }
    }
    Ok(())
}

/// `(dx, dgamma, dbeta)` for training-mode batch norm.
pub fn batch_norm_train_backward(
    shape: Shape,
    gamma: &Tensor,
    normalized: &[f64],
    inv_std: &[f64],
    grad_out: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = (shape.batch * shape.len) as f64;
    let mut dgamma = vec![0.0; shape.channels];
    let mut dbeta = vec![0.0; shape.channels];
    for b in 0..shape.batch {
        for c in 0..shape.channels {
            let off = (b * shape.channels + c) * shape.len;
            for t in 0..shape.len {
                dbeta[c] += grad_out[off + t];
                dgamma[c] += grad_out[off + t] * normalized[off + t];
            }
        }
    }
    let mut dx = vec![0.0; grad_out.len()];
    for b in 0..shape.batch {
        for c in 0..shape.channels {
            let off = (b * shape.channels + c) * shape.len;
            let scale = gamma.data()[c] * inv_std[c] / n;
            for t in 0..shape.len {
                dx[off + t] = scale
                    * (n * grad_out[off + t] - dbeta[c] - normalized[off + t] * dgamma[c]);
            }
        }
    }
    (dx, dgamma, dbeta)
}

/// Replicate-edge padded sliding-window maximum.
///
/// Returns the pooled values and, per output, the source index of the
/// winning element (first index on ties).
pub fn max_pool1d_forward(input: &Tensor, kernel: usize, stride: usize) -> Result<(Tensor, Vec<usize>)> {
    let s = input.shape();
    if kernel == 0 || stride == 0 {
        return Err(Error::InvalidArgument(format!(
            "max_pool1d: kernel {kernel} and stride {stride} must be >= 1"
        )));
    }
    let left = (kernel - 1) / 2;
    let padded = s.len + kernel - 1;
    if s.len == 0 || kernel > padded {
        return Err(Error::InvalidArgument(format!(
            "max_pool1d: kernel {kernel} larger than padded length {padded}"
        )));
    }
    let out_len = (padded - kernel) / stride + 1;
    let mut out = Tensor::zeros(Shape::new(s.batch, s.channels, out_len));
    let mut argmax = vec![0; out.numel()];
    let y = out.data_mut();
    for row in 0..s.batch * s.channels {
        let x = &input.data()[row * s.len..][..s.len];
        for t in 0..out_len {
            let start = t * stride;
            let mut best_idx = (start as isize - left as isize).clamp(0, s.len as isize - 1) as usize;
            let mut best = x[best_idx];
            for q in start + 1..start + kernel {
                let idx = (q as isize - left as isize).clamp(0, s.len as isize - 1) as usize;
                if x[idx] > best {
                    best = x[idx];
                    best_idx = idx;
                }
            }
            y[row * out_len + t] = best;
            argmax[row * out_len + t] = row * s.len + best_idx;
        }
    }
    Ok((out, argmax))
}

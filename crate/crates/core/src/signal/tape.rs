//! Reverse-mode automatic differentiation over [`Tensor`]s.
//!
//! A [`Tape`] records every op in execution order, which is a valid
//! topological order of the dataflow graph by construction. [`Tape::backward`]
//! walks the records once in reverse, accumulating gradients at fan-out.
//!
//! ```
//! use profilesr::signal::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.param(Tensor::from_signal(&[1.0, 2.0]));
//! let sq = tape.square(x).unwrap();
//! let loss = tape.sum(sq).unwrap();
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.get(x).unwrap(), &[2.0, 4.0]);
//! ```

use crate::error::{Error, Result};
use crate::signal::kernels::{self, BatchStats};
use crate::signal::{Shape, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Pointwise nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Sigmoid,
}

#[derive(Debug)]
enum Op {
    Leaf,
    Conv1d {
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
        padding: usize,
    },
    ConvTranspose1d {
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
    },
    BatchNormTrain {
        input: Var,
        gamma: Var,
        beta: Var,
        normalized: Vec<f64>,
        inv_std: Vec<f64>,
    },
    BatchNormEval {
        input: Var,
        gamma: Var,
        beta: Var,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
    },
    Activation {
        input: Var,
        kind: Activation,
    },
    Linear {
        input: Var,
        weight: Var,
        bias: Var,
    },
    MaxPool {
        input: Var,
        argmax: Vec<usize>,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Affine {
        input: Var,
        mul: f64,
    },
    Abs(Var),
    Square(Var),
    Log {
        input: Var,
        eps: f64,
    },
    Diff(Var),
    Sum(Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Ordered record of a forward computation.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every leaf that requires them.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    pub fn get(&self, var: Var) -> Option<&[f64]> {
        self.grads.get(var.0).and_then(|g| g.as_deref())
    }

    /// Gradient of `var`, or zeros of `len` when nothing reached it.
    pub fn get_or_zeros(&self, var: Var, len: usize) -> Vec<f64> {
        self.get(var).map_or_else(|| vec![0.0; len], <[f64]>::to_vec)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad: requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> Shape {
        self.nodes[var.0].value.shape()
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].needs_grad)
    }

    fn push(&mut self, name: &str, value: Tensor, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite(name.to_string()));
        }
        let needs_grad = self.needs(inputs);
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn conv1d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
        padding: usize,
    ) -> Result<Var> {
        let out = kernels::conv1d_forward(
            self.value(input),
            self.value(weight),
            bias.map(|b| self.value(b)),
            stride,
            padding,
        )?;
        let mut inputs = vec![input, weight];
        inputs.extend(bias);
        self.push(
            "conv1d",
            out,
            Op::Conv1d {
                input,
                weight,
                bias,
                stride,
                padding,
            },
            &inputs,
        )
    }

    pub fn conv1d_transpose(
        &mut self,
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
    ) -> Result<Var> {
        let out = kernels::conv1d_transpose_forward(
            self.value(input),
            self.value(weight),
            bias.map(|b| self.value(b)),
            stride,
        )?;
        let mut inputs = vec![input, weight];
        inputs.extend(bias);
        self.push(
            "conv1d_transpose",
            out,
            Op::ConvTranspose1d {
                input,
                weight,
                bias,
                stride,
            },
            &inputs,
        )
    }

    /// Batch norm with batch statistics; returns the statistics so the caller
    /// can fold them into running estimates.
    pub fn batch_norm_train(
        &mut self,
        input: Var,
        gamma: Var,
        beta: Var,
        eps: f64,
    ) -> Result<(Var, BatchStats)> {
        let fwd = kernels::batch_norm_train_forward(
            self.value(input),
            self.value(gamma),
            self.value(beta),
            eps,
        )?;
        let var = self.push(
            "batch_norm",
            fwd.output,
            Op::BatchNormTrain {
                input,
                gamma,
                beta,
                normalized: fwd.normalized,
                inv_std: fwd.inv_std,
            },
            &[input, gamma, beta],
        )?;
        Ok((var, fwd.stats))
    }

    /// Batch norm with fixed statistics.
    pub fn batch_norm_eval(
        &mut self,
        input: Var,
        gamma: Var,
        beta: Var,
        mean: &[f64],
        var: &[f64],
        eps: f64,
    ) -> Result<Var> {
        let x = self.value(input);
        let s = x.shape();
        let (g, b) = (self.value(gamma), self.value(beta));
        if [g.numel(), b.numel(), mean.len(), var.len()]
            .iter()
            .any(|&n| n != s.channels)
        {
            return Err(Error::ShapeMismatch {
                op: "batch_norm",
                left: s,
                right: g.shape(),
            });
        }
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
        let mut out = Tensor::zeros(s);
        let y = out.data_mut();
        for bi in 0..s.batch {
            for c in 0..s.channels {
                let off = (bi * s.channels + c) * s.len;
                for t in 0..s.len {
                    y[off + t] =
                        g.data()[c] * (x.data()[off + t] - mean[c]) * inv_std[c] + b.data()[c];
                }
            }
        }
        self.push(
            "batch_norm",
            out,
            Op::BatchNormEval {
                input,
                gamma,
                beta,
                mean: mean.to_vec(),
                inv_std,
            },
            &[input, gamma, beta],
        )
    }

    pub fn activation(&mut self, kind: Activation, input: Var) -> Result<Var> {
        let x = self.value(input);
        let data = match kind {
            Activation::Relu => x.data().iter().map(|&v| v.max(0.0)).collect(),
            Activation::LeakyRelu(slope) => {
                if !(slope > 0.0 && slope < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "leaky_relu slope {slope} outside (0, 1)"
                    )));
                }
                x.data()
                    .iter()
                    .map(|&v| if v > 0.0 { v } else { slope * v })
                    .collect()
            }
            Activation::Sigmoid => x.data().iter().map(|&v| sigmoid(v)).collect(),
        };
        let out = Tensor::new(x.shape(), data)?;
        self.push("activation", out, Op::Activation { input, kind }, &[input])
    }

    pub fn relu(&mut self, input: Var) -> Result<Var> {
        self.activation(Activation::Relu, input)
    }

    pub fn leaky_relu(&mut self, input: Var, slope: f64) -> Result<Var> {
        self.activation(Activation::LeakyRelu(slope), input)
    }

    pub fn sigmoid(&mut self, input: Var) -> Result<Var> {
        self.activation(Activation::Sigmoid, input)
    }

    /// Affine map over each batch entry flattened across `(channel, length)`.
    ///
    /// `weight` is `(out, in, 1)` with `in = channels * length`; the result
    /// has shape `(batch, out, 1)`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let x = self.value(input);
        let w = self.value(weight);
        let b = self.value(bias);
        let xs = x.shape();
        let ws = w.shape();
        let fan_in = xs.channels * xs.len;
        if ws.channels != fan_in || ws.len != 1 || b.numel() != ws.batch {
            return Err(Error::ShapeMismatch {
                op: "linear",
                left: xs,
                right: ws,
            });
        }
        let out_f = ws.batch;
        let mut out = Tensor::zeros(Shape::new(xs.batch, out_f, 1));
        let y = out.data_mut();
        for bi in 0..xs.batch {
            let xrow = &x.data()[bi * fan_in..][..fan_in];
            for o in 0..out_f {
                let wrow = &w.data()[o * fan_in..][..fan_in];
                y[bi * out_f + o] =
                    b.data()[o] + wrow.iter().zip(xrow).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        self.push(
            "linear",
            out,
            Op::Linear {
                input,
                weight,
                bias,
            },
            &[input, weight, bias],
        )
    }

    pub fn max_pool1d(&mut self, input: Var, kernel: usize, stride: usize) -> Result<Var> {
        let (out, argmax) = kernels::max_pool1d_forward(self.value(input), kernel, stride)?;
        self.push("max_pool1d", out, Op::MaxPool { input, argmax }, &[input])
    }

    fn binary(&mut self, name: &'static str, a: Var, b: Var, f: fn(f64, f64) -> f64) -> Result<Tensor> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(Error::ShapeMismatch {
                op: name,
                left: x.shape(),
                right: y.shape(),
            });
        }
        let data = x.data().iter().zip(y.data()).map(|(&p, &q)| f(p, q)).collect();
        Tensor::new(x.shape(), data)
    }

    fn unary(&self, a: Var, f: impl Fn(f64) -> f64) -> Tensor {
        let x = self.value(a);
        let data = x.data().iter().map(|&v| f(v)).collect();
        Tensor::new(x.shape(), data).expect("unary map preserves shape")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.binary("add", a, b, |p, q| p + q)?;
        self.push("add", out, Op::Add(a, b), &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.binary("sub", a, b, |p, q| p - q)?;
        self.push("sub", out, Op::Sub(a, b), &[a, b])
    }

    /// `mul * x + add`, elementwise.
    pub fn affine(&mut self, input: Var, mul: f64, add: f64) -> Result<Var> {
        let out = self.unary(input, |v| mul * v + add);
        self.push("affine", out, Op::Affine { input, mul }, &[input])
    }

    pub fn scale(&mut self, input: Var, factor: f64) -> Result<Var> {
        self.affine(input, factor, 0.0)
    }

    pub fn neg(&mut self, input: Var) -> Result<Var> {
        self.affine(input, -1.0, 0.0)
    }

    pub fn abs(&mut self, input: Var) -> Result<Var> {
        let out = self.unary(input, f64::abs);
        self.push("abs", out, Op::Abs(input), &[input])
    }

    pub fn square(&mut self, input: Var) -> Result<Var> {
        let out = self.unary(input, |v| v * v);
        self.push("square", out, Op::Square(input), &[input])
    }

    /// `ln(x + eps)`.
    pub fn log(&mut self, input: Var, eps: f64) -> Result<Var> {
        let out = self.unary(input, |v| (v + eps).ln());
        self.push("log", out, Op::Log { input, eps }, &[input])
    }

    /// First difference along the length axis: `y[t] = x[t+1] - x[t]`.
    pub fn diff(&mut self, input: Var) -> Result<Var> {
        let x = self.value(input);
        let s = x.shape();
        if s.len < 2 {
            return Err(Error::InvalidArgument(format!(
                "diff needs length >= 2, got {s}"
            )));
        }
        let mut data = Vec::with_capacity(s.batch * s.channels * (s.len - 1));
        for row in x.data().chunks(s.len) {
            data.extend(row.windows(2).map(|w| w[1] - w[0]));
        }
        let out = Tensor::new(Shape::new(s.batch, s.channels, s.len - 1), data)?;
        self.push("diff", out, Op::Diff(input), &[input])
    }

    pub fn sum(&mut self, input: Var) -> Result<Var> {
        let total = self.value(input).data().iter().sum();
        self.push("sum", Tensor::scalar(total), Op::Sum(input), &[input])
    }

    pub fn mean(&mut self, input: Var) -> Result<Var> {
        let n = self.value(input).numel();
        let s = self.sum(input)?;
        self.scale(s, 1.0 / n as f64)
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).numel() != 1 {
            return Err(Error::InvalidArgument(format!(
                "backward needs a scalar loss, got shape {}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.needs_grad {
                grads[id] = None;
                continue;
            }
            if let Op::Leaf = node.op {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            self.propagate(node, &g, &mut grads);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f64>>], var: Var, contrib: Vec<f64>) {
        if !self.nodes[var.0].needs_grad {
            return;
        }
        match &mut grads[var.0] {
            Some(acc) => acc.iter_mut().zip(&contrib).for_each(|(a, c)| *a += c),
            slot @ None => *slot = Some(contrib),
        }
    }

    fn map_grad(&self, g: &[f64], var: Var, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        g.iter()
            .zip(self.value(var).data())
            .map(|(&gi, &xi)| f(gi, xi))
            .collect()
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        match &node.op {
            Op::Leaf => {}
            Op::Conv1d {
                input,
                weight,
                bias,
                stride,
                padding,
            } => {
                let (dx, dw, db) = kernels::conv1d_backward(
                    self.value(*input),
                    self.value(*weight),
                    g,
                    *stride,
                    *padding,
                );
                self.accumulate(grads, *input, dx);
                self.accumulate(grads, *weight, dw);
                if let Some(b) = bias {
                    self.accumulate(grads, *b, db);
                }
            }
            Op::ConvTranspose1d {
                input,
                weight,
                bias,
                stride,
            } => {
                let (dx, dw, db) = kernels::conv1d_transpose_backward(
                    self.value(*input),
                    self.value(*weight),
                    g,
                    *stride,
                );
                self.accumulate(grads, *input, dx);
                self.accumulate(grads, *weight, dw);
                if let Some(b) = bias {
                    self.accumulate(grads, *b, db);
                }
            }
            Op::BatchNormTrain {
                input,
                gamma,
                beta,
                normalized,
                inv_std,
            } => {
                let (dx, dg, db) = kernels::batch_norm_train_backward(
                    self.shape(*input),
                    self.value(*gamma),
                    normalized,
                    inv_std,
                    g,
                );
                self.accumulate(grads, *input, dx);
                self.accumulate(grads, *gamma, dg);
                self.accumulate(grads, *beta, db);
            }
            Op::BatchNormEval {
                input,
                gamma,
                beta,
                mean,
                inv_std,
            } => {
                let s = self.shape(*input);
                let x = self.value(*input).data();
                let gm = self.value(*gamma).data();
                let mut dx = vec![0.0; g.len()];
                let mut dg = vec![0.0; s.channels];
                let mut db = vec![0.0; s.channels];
                for b in 0..s.batch {
                    for c in 0..s.channels {
                        let off = (b * s.channels + c) * s.len;
                        for t in 0..s.len {
                            let gi = g[off + t];
                            dx[off + t] = gi * gm[c] * inv_std[c];
                            dg[c] += gi * (x[off + t] - mean[c]) * inv_std[c];
                            db[c] += gi;
                        }
                    }
                }
                self.accumulate(grads, *input, dx);
                self.accumulate(grads, *gamma, dg);
                self.accumulate(grads, *beta, db);
            }
            Op::Activation { input, kind } => {
                let dx = match *kind {
                    Activation::Relu => {
                        self.map_grad(g, *input, |gi, xi| if xi > 0.0 { gi } else { 0.0 })
                    }
                    Activation::LeakyRelu(slope) => {
                        self.map_grad(g, *input, |gi, xi| if xi > 0.0 { gi } else { slope * gi })
                    }
                    Activation::Sigmoid => g
                        .iter()
                        .zip(node.value.data())
                        .map(|(&gi, &yi)| gi * yi * (1.0 - yi))
                        .collect(),
                };
                self.accumulate(grads, *input, dx);
            }
            Op::Linear {
                input,
                weight,
                bias,
            } => {
                let x = self.value(*input);
                let w = self.value(*weight);
                let batch = x.shape().batch;
                let fan_in = x.numel() / batch;
                let out_f = w.shape().batch;
                let mut dx = vec![0.0; x.numel()];
                let mut dw = vec![0.0; w.numel()];
                let mut db = vec![0.0; out_f];
                for b in 0..batch {
                    let xrow = &x.data()[b * fan_in..][..fan_in];
                    for o in 0..out_f {
                        let gi = g[b * out_f + o];
                        db[o] += gi;
                        let wrow = &w.data()[o * fan_in..][..fan_in];
                        let dxrow = &mut dx[b * fan_in..][..fan_in];
                        let dwrow = &mut dw[o * fan_in..][..fan_in];
                        for f in 0..fan_in {
                            dxrow[f] += gi * wrow[f];
                            dwrow[f] += gi * xrow[f];
                        }
                    }
                }
                self.accumulate(grads, *input, dx);
                self.accumulate(grads, *weight, dw);
                self.accumulate(grads, *bias, db);
            }
            Op::MaxPool { input, argmax } => {
                let mut dx = vec![0.0; self.value(*input).numel()];
                for (&src, &gi) in argmax.iter().zip(g) {
                    dx[src] += gi;
                }
                self.accumulate(grads, *input, dx);
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.to_vec());
                self.accumulate(grads, *b, g.to_vec());
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, g.to_vec());
                self.accumulate(grads, *b, g.iter().map(|v| -v).collect());
            }
            Op::Affine { input, mul } => {
                self.accumulate(grads, *input, g.iter().map(|v| v * mul).collect());
            }
            Op::Abs(input) => {
                let dx = self.map_grad(g, *input, |gi, xi| {
                    if xi > 0.0 {
                        gi
                    } else if xi < 0.0 {
                        -gi
                    } else {
                        0.0
                    }
                });
                self.accumulate(grads, *input, dx);
            }
            Op::Square(input) => {
                let dx = self.map_grad(g, *input, |gi, xi| 2.0 * xi * gi);
                self.accumulate(grads, *input, dx);
            }
            Op::Log { input, eps } => {
                let dx = self.map_grad(g, *input, |gi, xi| gi / (xi + eps));
                self.accumulate(grads, *input, dx);
            }
            Op::Diff(input) => {
                let s = self.shape(*input);
                let mut dx = vec![0.0; s.numel()];
                let out_len = s.len - 1;
                for row in 0..s.batch * s.channels {
                    for t in 0..out_len {
                        let gi = g[row * out_len + t];
                        dx[row * s.len + t + 1] += gi;
                        dx[row * s.len + t] -= gi;
                    }
                }
                self.accumulate(grads, *input, dx);
            }
            Op::Sum(input) => {
                let n = self.value(*input).numel();
                self.accumulate(grads, *input, vec![g[0]; n]);
            }
        }
    }
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

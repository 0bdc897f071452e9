use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extent of a `(batch, channel, length)` array.
///
/// Parameters reuse the same triple: a conv weight is `(out, in, kernel)`,
/// a per-channel vector is `(1, channels, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub batch: usize,
    pub channels: usize,
    pub len: usize,
}

impl Shape {
    pub const fn new(batch: usize, channels: usize, len: usize) -> Self {
        Self {
            batch,
            channels,
            len,
        }
    }

    pub const fn scalar() -> Self {
        Self::new(1, 1, 1)
    }

    /// Per-channel vector `(1, n, 1)`.
    pub const fn channel_vector(n: usize) -> Self {
        Self::new(1, n, 1)
    }

    pub const fn numel(&self) -> usize {
        self.batch * self.channels * self.len
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.batch, self.channels, self.len)
    }
}

/// Dense fp64 array over a [`Shape`], row-major in `(batch, channel, length)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.numel() {
            return Err(Error::InvalidArgument(format!(
                "tensor of shape {shape} needs {} values, got {}",
                shape.numel(),
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.numel()],
        }
    }

    pub fn full(shape: Shape, value: f64) -> Self {
        Self {
            shape,
            data: vec![value; shape.numel()],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: Shape::scalar(),
            data: vec![value],
        }
    }

    /// A single-channel batch of one signal.
    pub fn from_signal(values: &[f64]) -> Self {
        Self {
            shape: Shape::new(1, 1, values.len()),
            data: values.to_vec(),
        }
    }

    /// Stacks equal-length single-channel signals into a `(n, 1, len)` batch.
    pub fn from_signals<S: AsRef<[f64]>>(signals: &[S]) -> Result<Self> {
        let len = signals.first().map_or(0, |s| s.as_ref().len());
        let mut data = Vec::with_capacity(signals.len() * len);
        for s in signals {
            let s = s.as_ref();
            if s.len() != len {
                return Err(Error::LengthMismatch {
                    op: "from_signals",
                    left: len,
                    right: s.len(),
                });
            }
            data.extend_from_slice(s);
        }
        Self::new(Shape::new(signals.len(), 1, len), data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Value of a one-element tensor.
    pub fn item(&self) -> Result<f64> {
        match self.data.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::InvalidArgument(format!(
                "expected a scalar, got shape {}",
                self.shape
            ))),
        }
    }

    pub fn at(&self, b: usize, c: usize, t: usize) -> f64 {
        self.data[self.offset(b, c, t)]
    }

    fn offset(&self, b: usize, c: usize, t: usize) -> usize {
        (b * self.shape.channels + c) * self.shape.len + t
    }

    /// Contiguous slice of one `(batch, channel)` row.
    pub fn row(&self, b: usize, c: usize) -> &[f64] {
        let start = self.offset(b, c, 0);
        &self.data[start..start + self.shape.len]
    }

    /// Reinterprets the storage under a new shape of equal element count.
    pub fn reshape(self, shape: Shape) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Concatenates along the channel axis; batch and length must agree.
    pub fn concat_channels(parts: &[&Tensor]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("concat of zero tensors".into()))?
            .shape;
        let mut channels = 0;
        for p in parts {
            if p.shape.batch != first.batch || p.shape.len != first.len {
                return Err(Error::ShapeMismatch {
                    op: "concat_channels",
                    left: first,
                    right: p.shape,
                });
            }
            channels += p.shape.channels;
        }
        let shape = Shape::new(first.batch, channels, first.len);
        let mut data = Vec::with_capacity(shape.numel());
        for b in 0..first.batch {
            for p in parts {
                let n = p.shape.channels * p.shape.len;
                data.extend_from_slice(&p.data[b * n..(b + 1) * n]);
            }
        }
        Self::new(shape, data)
    }

    /// Selects a subset of batch entries, in the given order.
    pub fn select_batch(&self, indices: &[usize]) -> Result<Self> {
        let per = self.shape.channels * self.shape.len;
        let mut data = Vec::with_capacity(indices.len() * per);
        for &i in indices {
            if i >= self.shape.batch {
                return Err(Error::InvalidArgument(format!(
                    "batch index {i} out of range for shape {}",
                    self.shape
                )));
            }
            data.extend_from_slice(&self.data[i * per..(i + 1) * per]);
        }
        Self::new(
            Shape::new(indices.len(), self.shape.channels, self.shape.len),
            data,
        )
    }

    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                op: "dot",
                left: self.shape,
                right: other.shape,
            });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }
}

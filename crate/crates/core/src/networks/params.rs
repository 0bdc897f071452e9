use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::networks::config::{Architecture, Init};
use crate::signal::{BatchStats, Gradients, Tape, Tensor, Var, BN_EPS, BN_MOMENTUM};

/// Standard deviation of initial conv / linear weights.
pub const INIT_STD: f64 = 0.02;

/// Exponential moving averages of batch-norm statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl RunningStats {
    pub fn new(channels: usize) -> Self {
        Self {
            mean: vec![0.0; channels],
            var: vec![1.0; channels],
        }
    }

    /// Folds one batch in with momentum `m`; the variance estimate is unbiased.
    pub fn update(&mut self, batch: &BatchStats, m: f64) {
        let n = batch.count as f64;
        let correction = if batch.count > 1 { n / (n - 1.0) } else { 1.0 };
        for c in 0..self.mean.len() {
            self.mean[c] = (1.0 - m) * self.mean[c] + m * batch.mean[c];
            self.var[c] = (1.0 - m) * self.var[c] + m * batch.var[c] * correction;
        }
    }
}

/// Named parameter tensors plus batch-norm running statistics of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub fingerprint: u64,
    pub tensors: BTreeMap<String, Tensor>,
    pub running: BTreeMap<String, RunningStats>,
}

/// Whether batch norm uses batch statistics (and updates running ones).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Draws fresh parameters for `arch`: Normal(0, 0.02) weights, zero biases,
/// unit batch-norm scales.
pub fn init_params<A, R>(arch: &A, rng: &mut R) -> NetworkParams
where
    A: Architecture + std::fmt::Debug,
    R: Rng + ?Sized,
{
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    let tensors = arch
        .param_specs()
        .into_iter()
        .map(|(name, shape, init)| {
            let t = match init {
                Init::Normal => {
                    let data = (0..shape.numel()).map(|_| normal.sample(rng)).collect();
                    Tensor::new(shape, data).expect("shape-sized data")
                }
                Init::Zeros => Tensor::zeros(shape),
                Init::Ones => Tensor::full(shape, 1.0),
            };
            (name, t)
        })
        .collect();
    let running = arch
        .batch_norm_layers()
        .into_iter()
        .map(|(name, ch)| (name, RunningStats::new(ch)))
        .collect();
    NetworkParams {
        fingerprint: arch.fingerprint(),
        tensors,
        running,
    }
}

impl NetworkParams {
    pub fn param_count(&self) -> usize {
        self.tensors.values().map(Tensor::numel).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.values().all(Tensor::is_finite)
            && self
                .running
                .values()
                .all(|r| r.mean.iter().chain(&r.var).all(|v| v.is_finite()))
    }

    /// Confirms the parameter set was built for `arch`.
    pub fn check_arch<A: Architecture + std::fmt::Debug>(&self, arch: &A) -> Result<()> {
        if self.fingerprint != arch.fingerprint() {
            return Err(invalid(format!(
                "parameter fingerprint {:016x} does not match {} config {:016x}",
                self.fingerprint,
                arch.kind(),
                arch.fingerprint()
            )));
        }
        Ok(())
    }

    /// Places every tensor on `tape`. In [`Mode::Train`] batch-norm layers
    /// use batch statistics and fold them into the running estimates.
    pub fn bind<'p>(&'p mut self, tape: &mut Tape, requires_grad: bool, mode: Mode) -> Session<'p> {
        let vars = self
            .tensors
            .iter()
            .map(|(name, t)| (name.clone(), tape.leaf(t.clone(), requires_grad)))
            .collect();
        let running = match mode {
            Mode::Train => Running::Train(&mut self.running),
            Mode::Eval => Running::Eval(&self.running),
        };
        Session { vars, running }
    }

    /// Eval-mode binding that never touches running statistics.
    pub fn bind_eval<'p>(&'p self, tape: &mut Tape, requires_grad: bool) -> Session<'p> {
        let vars = self
            .tensors
            .iter()
            .map(|(name, t)| (name.clone(), tape.leaf(t.clone(), requires_grad)))
            .collect();
        Session {
            vars,
            running: Running::Eval(&self.running),
        }
    }
}

enum Running<'p> {
    Train(&'p mut BTreeMap<String, RunningStats>),
    Eval(&'p BTreeMap<String, RunningStats>),
}

/// Parameters of one network bound to a tape, with layer helpers.
pub struct Session<'p> {
    vars: BTreeMap<String, Var>,
    running: Running<'p>,
}

impl Session<'_> {
    pub fn var(&self, name: &str) -> Result<Var> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| invalid(format!("missing parameter `{name}`")))
    }

    pub fn vars(&self) -> &BTreeMap<String, Var> {
        &self.vars
    }

    /// Gradients keyed by parameter name (zeros where nothing flowed).
    pub fn gradients(&self, tape: &Tape, grads: &Gradients) -> BTreeMap<String, Vec<f64>> {
        self.vars
            .iter()
            .map(|(name, &v)| (name.clone(), grads.get_or_zeros(v, tape.value(v).numel())))
            .collect()
    }

    pub fn conv(&self, tape: &mut Tape, layer: &str, x: Var, stride: usize, padding: usize) -> Result<Var> {
        let w = self.var(&format!("{layer}.weight"))?;
        let b = self.var(&format!("{layer}.bias"))?;
        tape.conv1d(x, w, Some(b), stride, padding)
    }

    /// Transpose conv whose kernel equals its stride (non-overlapping blocks).
    pub fn conv_transpose(&self, tape: &mut Tape, layer: &str, x: Var, stride: usize) -> Result<Var> {
        let w = self.var(&format!("{layer}.weight"))?;
        let b = self.var(&format!("{layer}.bias"))?;
        tape.conv1d_transpose(x, w, Some(b), stride)
    }

    pub fn batch_norm(&mut self, tape: &mut Tape, layer: &str, x: Var) -> Result<Var> {
        let gamma = self.var(&format!("{layer}.gamma"))?;
        let beta = self.var(&format!("{layer}.beta"))?;
        match &mut self.running {
            Running::Train(stats) => {
                let (y, batch) = tape.batch_norm_train(x, gamma, beta, BN_EPS)?;
                stats
                    .get_mut(layer)
                    .ok_or_else(|| invalid(format!("missing running stats `{layer}`")))?
                    .update(&batch, BN_MOMENTUM);
                Ok(y)
            }
            Running::Eval(stats) => {
                let r = stats
                    .get(layer)
                    .ok_or_else(|| invalid(format!("missing running stats `{layer}`")))?;
                tape.batch_norm_eval(x, gamma, beta, &r.mean, &r.var, BN_EPS)
            }
        }
    }

    pub fn linear(&self, tape: &mut Tape, layer: &str, x: Var) -> Result<Var> {
        let w = self.var(&format!("{layer}.weight"))?;
        let b = self.var(&format!("{layer}.bias"))?;
        tape.linear(x, w, b)
    }

    /// `x + bn2(conv2(relu(bn1(conv1(x)))))` with length-preserving odd kernels.
    pub fn residual_block(&mut self, tape: &mut Tape, block: &str, x: Var, kernel: usize) -> Result<Var> {
        if kernel % 2 == 0 {
            return Err(invalid(format!("residual block kernel {kernel} must be odd")));
        }
        let pad = kernel / 2;
        let h = self.conv(tape, &format!("{block}.conv1"), x, 1, pad)?;
        let h = self.batch_norm(tape, &format!("{block}.bn1"), h)?;
        let h = tape.relu(h)?;
        let h = self.conv(tape, &format!("{block}.conv2"), h, 1, pad)?;
        let h = self.batch_norm(tape, &format!("{block}.bn2"), h)?;
        if tape.shape(h) != tape.shape(x) {
            return Err(crate::Error::ShapeMismatch {
                op: "residual_block",
                left: tape.shape(x),
                right: tape.shape(h),
            });
        }
        tape.add(x, h)
    }
}

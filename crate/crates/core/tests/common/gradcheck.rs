//! Central finite-difference checks of tape gradients.

use std::collections::BTreeMap;

use profilesr::losses::{graph, LossWeights, PoolConfig};
use profilesr::networks::{
    discriminator_graph, generator_graph, init_params, polisher_graph, DiscriminatorConfig,
    GeneratorConfig, Mode, NetworkParams, PolisherConfig,
};
use profilesr::rng::{self, Rng};
use profilesr::signal::{Activation, Shape, Tape, Tensor, Var};
use profilesr::Result;
use rand::seq::SliceRandom;
use rand::Rng as _;

const STEP: f64 = 1e-6;
/// Allowed gap between one-sided slopes before a point counts as a kink.
const KINK: f64 = 1e-3;

/// Norm-wise relative error between analytic and numeric gradients.
pub fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n) * (a - n)).sum::<f64>().sqrt();
    let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    diff / na.max(nn).max(1e-8)
}

type Build<'a> = dyn Fn(&mut Tape, &[Var]) -> Result<Var> + 'a;

fn evaluate(inputs: &[Tensor], build: &Build<'_>) -> Result<f64> {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone(), true)).collect();
    let out = build(&mut tape, &vars)?;
    tape.value(out).item()
}

/// Central difference at one coordinate, or `None` when the one-sided
/// slopes disagree because the step straddles a kink.
fn central(up: f64, mid: f64, down: f64) -> Option<f64> {
    let (fwd, bwd) = ((up - mid) / STEP, (mid - down) / STEP);
    let c = (up - down) / (2.0 * STEP);
    ((fwd - bwd).abs() <= KINK * (1.0 + c.abs())).then_some(c)
}

/// Largest relative error over every input of a scalar-valued graph, or
/// `None` when the instance sits on a non-differentiable point.
pub fn check(inputs: &[Tensor], build: &Build<'_>) -> Result<Option<f64>> {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone(), true)).collect();
    let out = build(&mut tape, &vars)?;
    let mid = tape.value(out).item()?;
    let grads = tape.backward(out)?;
    let mut worst: f64 = 0.0;
    for (k, input) in inputs.iter().enumerate() {
        let analytic = grads.get_or_zeros(vars[k], input.numel());
        let mut numeric = Vec::with_capacity(input.numel());
        for j in 0..input.numel() {
            let mut shifted = inputs.to_vec();
            shifted[k].data_mut()[j] = input.data()[j] + STEP;
            let up = evaluate(&shifted, build)?;
            shifted[k].data_mut()[j] = input.data()[j] - STEP;
            let down = evaluate(&shifted, build)?;
            match central(up, mid, down) {
                Some(c) => numeric.push(c),
                None => return Ok(None),
            }
        }
        worst = worst.max(rel_error(&analytic, &numeric));
    }
    Ok(Some(worst))
}

pub fn uniform(rng: &mut Rng, shape: Shape, lo: f64, hi: f64) -> Tensor {
    let data = (0..shape.numel()).map(|_| rng.random_range(lo..hi)).collect();
    Tensor::new(shape, data).unwrap()
}

/// Values with magnitude in [0.1, 1] and random sign, clear of kinks at zero.
pub fn off_zero(rng: &mut Rng, shape: Shape) -> Tensor {
    let data = (0..shape.numel())
        .map(|_| {
            let m = rng.random_range(0.1..1.0);
            if rng.random_bool(0.5) { m } else { -m }
        })
        .collect();
    Tensor::new(shape, data).unwrap()
}

/// Pairwise distinct values (spacing 0.05), so max-pool winners never tie.
pub fn distinct(rng: &mut Rng, shape: Shape) -> Tensor {
    let mut ranks: Vec<usize> = (0..shape.numel()).collect();
    ranks.shuffle(rng);
    let data = ranks.iter().map(|&r| r as f64 * 0.05 - 1.0 + rng.random_range(0.0..0.01)).collect();
    Tensor::new(shape, data).unwrap()
}

/// Rows whose first differences have distinct magnitudes of at least 0.2.
pub fn distinct_steps(rng: &mut Rng, batch: usize, len: usize) -> Tensor {
    let mut data = Vec::with_capacity(batch * len);
    for _ in 0..batch {
        let mut ranks: Vec<usize> = (0..len - 1).collect();
        ranks.shuffle(rng);
        let mut v = rng.random_range(-1.0..1.0);
        data.push(v);
        for r in ranks {
            let m = 0.2 + 0.05 * r as f64;
            v += if rng.random_bool(0.5) { m } else { -m };
            data.push(v);
        }
    }
    Tensor::new(Shape::new(batch, 1, len), data).unwrap()
}

/// Scalar `sum(W · flatten(y))` with a random constant projection.
pub fn project(tape: &mut Tape, y: Var, rng: &mut Rng) -> Result<Var> {
    let s = tape.shape(y);
    let w = uniform(rng, Shape::new(1, s.channels * s.len, 1), -1.0, 1.0);
    let w = tape.constant(w);
    let b = tape.constant(Tensor::zeros(Shape::channel_vector(1)));
    let l = tape.linear(y, w, b)?;
    tape.sum(l)
}

/// One randomized instance of a gradient check, returning its error.
pub type Case = fn(&mut Rng) -> Result<Option<f64>>;

fn with_projection(inputs: Vec<Tensor>, rng: &mut Rng, op: impl Fn(&mut Tape, &[Var]) -> Result<Var>) -> Result<Option<f64>> {
    let seed: u64 = rng.random();
    check(&inputs, &move |tape: &mut Tape, v: &[Var]| {
        let y = op(tape, v)?;
        project(tape, y, &mut rng::stream(seed, "projection"))
    })
}

fn small_shape(rng: &mut Rng) -> Shape {
    Shape::new(rng.random_range(1..3), rng.random_range(1..3), rng.random_range(3..8))
}

fn conv1d(rng: &mut Rng) -> Result<Option<f64>> {
    let (b, cin, cout) = (rng.random_range(1..3), rng.random_range(1..3), rng.random_range(1..3));
    let k = [1, 3, 5][rng.random_range(0..3)];
    let stride = rng.random_range(1..3);
    let padding = rng.random_range(0..=k / 2);
    let x = uniform(rng, Shape::new(b, cin, 8), -1.0, 1.0);
    let w = uniform(rng, Shape::new(cout, cin, k), -1.0, 1.0);
    let bias = uniform(rng, Shape::channel_vector(cout), -1.0, 1.0);
    with_projection(vec![x, w, bias], rng, move |t, v| t.conv1d(v[0], v[1], Some(v[2]), stride, padding))
}

fn conv1d_transpose(rng: &mut Rng) -> Result<Option<f64>> {
    let (b, cin, cout) = (rng.random_range(1..3), rng.random_range(1..3), rng.random_range(1..3));
    let stride = rng.random_range(1..5);
    let k = [stride, stride + 1][rng.random_range(0..2)];
    let x = uniform(rng, Shape::new(b, cin, 5), -1.0, 1.0);
    let w = uniform(rng, Shape::new(cin, cout, k), -1.0, 1.0);
    let bias = uniform(rng, Shape::channel_vector(cout), -1.0, 1.0);
    with_projection(vec![x, w, bias], rng, move |t, v| t.conv1d_transpose(v[0], v[1], Some(v[2]), stride))
}

fn batch_norm_train(rng: &mut Rng) -> Result<Option<f64>> {
    let c = rng.random_range(1..4);
    let b = rng.random_range(2..4);
    let x = uniform(rng, Shape::new(b, c, 6), -2.0, 2.0);
    let g = uniform(rng, Shape::channel_vector(c), 0.5, 1.5);
    let b = uniform(rng, Shape::channel_vector(c), -1.0, 1.0);
    with_projection(vec![x, g, b], rng, |t, v| Ok(t.batch_norm_train(v[0], v[1], v[2], 1e-5)?.0))
}

fn batch_norm_eval(rng: &mut Rng) -> Result<Option<f64>> {
    let c = rng.random_range(1..4);
    let x = uniform(rng, Shape::new(2, c, 6), -2.0, 2.0);
    let g = uniform(rng, Shape::channel_vector(c), 0.5, 1.5);
    let b = uniform(rng, Shape::channel_vector(c), -1.0, 1.0);
    let mean: Vec<f64> = (0..c).map(|_| rng.random_range(-1.0..1.0)).collect();
    let var: Vec<f64> = (0..c).map(|_| rng.random_range(0.5..2.0)).collect();
    with_projection(vec![x, g, b], rng, move |t, v| t.batch_norm_eval(v[0], v[1], v[2], &mean, &var, 1e-5))
}

fn activation(kind: Activation) -> impl Fn(&mut Rng) -> Result<Option<f64>> {
    move |rng| {
        let s = small_shape(rng);
        let x = off_zero(rng, s);
        with_projection(vec![x], rng, move |t, v| t.activation(kind, v[0]))
    }
}

fn relu(rng: &mut Rng) -> Result<Option<f64>> {
    activation(Activation::Relu)(rng)
}

fn leaky_relu(rng: &mut Rng) -> Result<Option<f64>> {
    activation(Activation::LeakyRelu(0.2))(rng)
}

fn sigmoid(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = uniform(rng, s, -4.0, 4.0);
    with_projection(vec![x], rng, |t, v| t.sigmoid(v[0]))
}

fn linear(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let out = rng.random_range(1..4);
    let x = uniform(rng, s, -1.0, 1.0);
    let w = uniform(rng, Shape::new(out, s.channels * s.len, 1), -1.0, 1.0);
    let b = uniform(rng, Shape::channel_vector(out), -1.0, 1.0);
    with_projection(vec![x, w, b], rng, |t, v| t.linear(v[0], v[1], v[2]))
}

fn max_pool(rng: &mut Rng) -> Result<Option<f64>> {
    let x = distinct(rng, Shape::new(2, 2, 9));
    let k = rng.random_range(1..5);
    let s = rng.random_range(1..3);
    with_projection(vec![x], rng, move |t, v| t.max_pool1d(v[0], k, s))
}

fn add(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let (a, b) = (uniform(rng, s, -1.0, 1.0), uniform(rng, s, -1.0, 1.0));
    with_projection(vec![a, b], rng, |t, v| t.add(v[0], v[1]))
}

fn sub(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let (a, b) = (uniform(rng, s, -1.0, 1.0), uniform(rng, s, -1.0, 1.0));
    with_projection(vec![a, b], rng, |t, v| t.sub(v[0], v[1]))
}

fn affine(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = uniform(rng, s, -1.0, 1.0);
    let (m, a) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    with_projection(vec![x], rng, move |t, v| t.affine(v[0], m, a))
}

fn abs(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = off_zero(rng, s);
    with_projection(vec![x], rng, |t, v| t.abs(v[0]))
}

fn square(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = uniform(rng, s, -2.0, 2.0);
    with_projection(vec![x], rng, |t, v| t.square(v[0]))
}

fn log(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = uniform(rng, s, 0.1, 3.0);
    with_projection(vec![x], rng, |t, v| t.log(v[0], 1e-12))
}

fn diff(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = uniform(rng, s, -1.0, 1.0);
    with_projection(vec![x], rng, |t, v| t.diff(v[0]))
}

fn sum_mean(rng: &mut Rng) -> Result<Option<f64>> {
    let s = small_shape(rng);
    let x = uniform(rng, s, -1.0, 1.0);
    let use_mean = rng.random_bool(0.5);
    check(&[x], &move |t: &mut Tape, v: &[Var]| {
        let sq = t.square(v[0])?;
        if use_mean { t.mean(sq) } else { t.sum(sq) }
    })
}

fn content_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let s = Shape::new(rng.random_range(1..4), 1, rng.random_range(4..12));
    let (g, y) = (uniform(rng, s, -1.0, 1.0), uniform(rng, s, -1.0, 1.0));
    check(&[g, y], &|t: &mut Tape, v: &[Var]| graph::content_loss(t, v[0], v[1]))
}

fn discriminator_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let s = Shape::new(rng.random_range(1..5), 1, 1);
    let (r, f) = (uniform(rng, s, 0.05, 0.95), uniform(rng, s, 0.05, 0.95));
    check(&[r, f], &|t: &mut Tape, v: &[Var]| graph::discriminator_loss(t, v[0], v[1]))
}

fn adversarial_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let b = rng.random_range(1..5);
    let f = uniform(rng, Shape::new(b, 1, 1), 0.05, 0.95);
    check(&[f], &|t: &mut Tape, v: &[Var]| graph::adversarial_loss(t, v[0]))
}

fn feature_matching_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let b = rng.random_range(1..3);
    let shapes = [Shape::new(b, 2, 6), Shape::new(b, 3, 3)];
    let mut inputs = Vec::new();
    for s in shapes {
        inputs.push(uniform(rng, s, -1.0, 1.0));
        inputs.push(uniform(rng, s, -1.0, 1.0));
    }
    check(&inputs, &|t: &mut Tape, v: &[Var]| graph::feature_matching_loss(t, &[v[0], v[2]], &[v[1], v[3]]))
}

fn generator_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let parts: Vec<Tensor> = (0..3).map(|_| uniform(rng, Shape::scalar(), 0.0, 2.0)).collect();
    let w = LossWeights { adversarial: rng.random_range(0.0..1.0), feature: rng.random_range(0.0..1.0) };
    check(&parts, &move |t: &mut Tape, v: &[Var]| graph::generator_loss(t, v[0], v[1], v[2], w))
}

fn outline_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let s = Shape::new(rng.random_range(1..3), 1, 10);
    let (g, y) = (distinct(rng, s), distinct(rng, s));
    check(&[g, y], &|t: &mut Tape, v: &[Var]| graph::outline_loss(t, v[0], v[1], PoolConfig::default()))
}

fn switching_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let b = rng.random_range(1..3);
    let (g, y) = (distinct_steps(rng, b, 10), distinct_steps(rng, b, 10));
    check(&[g, y], &|t: &mut Tape, v: &[Var]| graph::switching_loss(t, v[0], v[1], PoolConfig::default()))
}

fn polishing_loss(rng: &mut Rng) -> Result<Option<f64>> {
    let b = rng.random_range(1..3);
    let (g, y) = (distinct_steps(rng, b, 10), distinct_steps(rng, b, 10));
    check(&[g, y], &|t: &mut Tape, v: &[Var]| Ok(graph::polishing_loss(t, v[0], v[1], PoolConfig::default())?.0))
}

/// Every differentiable tape operation.
pub const OPS: &[(&str, Case)] = &[
    ("conv1d", conv1d),
    ("conv1d_transpose", conv1d_transpose),
    ("batch_norm_train", batch_norm_train),
    ("batch_norm_eval", batch_norm_eval),
    ("relu", relu),
    ("leaky_relu", leaky_relu),
    ("sigmoid", sigmoid),
    ("linear", linear),
    ("max_pool1d", max_pool),
    ("add", add),
    ("sub", sub),
    ("affine", affine),
    ("abs", abs),
    ("square", square),
    ("log", log),
    ("diff", diff),
    ("sum/mean", sum_mean),
];

/// Every training objective.
pub const LOSSES: &[(&str, Case)] = &[
    ("content", content_loss),
    ("discriminator", discriminator_loss),
    ("adversarial", adversarial_loss),
    ("feature_matching", feature_matching_loss),
    ("generator", generator_loss),
    ("outline", outline_loss),
    ("switching", switching_loss),
    ("polishing", polishing_loss),
];

/// Relative error of the full parameter gradient, taken norm-wise over all
/// tensors at once; `loss` returns the value and gradient for one parameter set.
pub fn check_params(
    params: &NetworkParams,
    loss: &dyn Fn(&NetworkParams) -> Result<(f64, BTreeMap<String, Vec<f64>>)>,
) -> Result<Option<f64>> {
    let (mid, grads) = loss(params)?;
    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    for (name, tensor) in &params.tensors {
        analytic.extend_from_slice(&grads[name]);
        for j in 0..tensor.numel() {
            let mut shifted = params.clone();
            shifted.tensors.get_mut(name).expect("same keys").data_mut()[j] += STEP;
            let up = loss(&shifted)?.0;
            shifted.tensors.get_mut(name).expect("same keys").data_mut()[j] -= 2.0 * STEP;
            let down = loss(&shifted)?.0;
            match central(up, mid, down) {
                Some(c) => numeric.push(c),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(rel_error(&analytic, &numeric)))
}

/// Redraws every weight and bias uniformly in [-0.5, 0.5], keeping
/// batch-norm scales at one, so layers are well conditioned.
fn rescale(params: &mut NetworkParams, rng: &mut Rng) {
    for (name, t) in params.tensors.iter_mut() {
        if name.ends_with(".weight") || name.ends_with(".bias") {
            *t = uniform(rng, t.shape(), -0.5, 0.5);
        }
    }
}

fn tiny_generator() -> GeneratorConfig {
    GeneratorConfig {
        in_channels: 2,
        features: 3,
        residual_blocks: 2,
        outer_kernel: 3,
        inner_kernel: 3,
        strides: (2, 1),
        input_skip: true,
    }
}

/// Full stage-one generator objective through a two-block generator and a
/// frozen discriminator, checked on every generator parameter.
pub fn generator_end_to_end(rng: &mut Rng) -> Result<Option<f64>> {
    let cfg = tiny_generator();
    let dcfg = DiscriminatorConfig {
        features: [2, 3, 4, 5],
        ..DiscriminatorConfig::new(16)
    };
    let seed: u64 = rng.random();
    let mut params = init_params(&cfg, &mut rng::stream(seed, "g"));
    rescale(&mut params, rng);
    let mut disc = init_params(&dcfg, &mut rng::stream(seed, "d"));
    rescale(&mut disc, rng);
    let x = uniform(rng, Shape::new(2, 2, 8), -1.0, 1.0);
    let y = uniform(rng, Shape::new(2, 1, 16), -1.0, 1.0);
    let weights = LossWeights { adversarial: rng.random_range(0.1..1.0), feature: rng.random_range(0.1..1.0) };
    check_params(&params, &|p: &NetworkParams| {
        let mut p = p.clone();
        let mut tape = Tape::new();
        let input = tape.constant(x.clone());
        let target = tape.constant(y.clone());
        let mut session = p.bind(&mut tape, true, Mode::Train);
        let fake = generator_graph(&cfg, &mut session, &mut tape, input)?;
        let d = disc.bind_eval(&mut tape, false);
        let f = discriminator_graph(&dcfg, &d, &mut tape, fake)?;
        let r = discriminator_graph(&dcfg, &d, &mut tape, target)?;
        let content = graph::content_loss(&mut tape, fake, target)?;
        let adv = graph::adversarial_loss(&mut tape, f.score)?;
        let feat = graph::feature_matching_loss(&mut tape, &f.features, &r.features)?;
        let total = graph::generator_loss(&mut tape, content, adv, feat, weights)?;
        let grads = tape.backward(total)?;
        Ok((tape.value(total).item()?, session.gradients(&tape, &grads)))
    })
}

/// Discriminator objective checked on every discriminator parameter.
pub fn discriminator_end_to_end(rng: &mut Rng) -> Result<Option<f64>> {
    let dcfg = DiscriminatorConfig {
        features: [2, 3, 4, 5],
        ..DiscriminatorConfig::new(16)
    };
    let seed: u64 = rng.random();
    let mut params = init_params(&dcfg, &mut rng::stream(seed, "d"));
    rescale(&mut params, rng);
    let real = uniform(rng, Shape::new(3, 1, 16), -1.0, 1.0);
    let fake = uniform(rng, Shape::new(3, 1, 16), -1.0, 1.0);
    check_params(&params, &|p: &NetworkParams| {
        let mut tape = Tape::new();
        let r = tape.constant(real.clone());
        let f = tape.constant(fake.clone());
        let session = p.bind_eval(&mut tape, true);
        let sr = discriminator_graph(&dcfg, &session, &mut tape, r)?;
        let sf = discriminator_graph(&dcfg, &session, &mut tape, f)?;
        let loss = graph::discriminator_loss(&mut tape, sr.score, sf.score)?;
        let grads = tape.backward(loss)?;
        Ok((tape.value(loss).item()?, session.gradients(&tape, &grads)))
    })
}

/// Polishing loss through a two-block polisher.
pub fn polisher_end_to_end(rng: &mut Rng) -> Result<Option<f64>> {
    let cfg = PolisherConfig {
        features: 3,
        residual_blocks: 2,
        outer_kernel: 3,
        inner_kernel: 3,
    };
    let seed: u64 = rng.random();
    let mut params = init_params(&cfg, &mut rng::stream(seed, "p"));
    rescale(&mut params, rng);
    let x = distinct_steps(rng, 2, 10);
    let y = distinct_steps(rng, 2, 10);
    check_params(&params, &|p: &NetworkParams| {
        let mut p = p.clone();
        let mut tape = Tape::new();
        let input = tape.constant(x.clone());
        let target = tape.constant(y.clone());
        let mut session = p.bind(&mut tape, true, Mode::Train);
        let out = polisher_graph(&cfg, &mut session, &mut tape, input)?;
        let loss = graph::polishing_loss(&mut tape, out, target, PoolConfig::default())?.0;
        let grads = tape.backward(loss)?;
        Ok((tape.value(loss).item()?, session.gradients(&tape, &grads)))
    })
}

/// Whole networks, checked on their trainable parameters.
pub const NETWORKS: &[(&str, Case)] = &[
    ("generator", generator_end_to_end),
    ("discriminator", discriminator_end_to_end),
    ("polisher", polisher_end_to_end),
];

/// Worst error over `trials` differentiable instances of a case, and the
/// number of instances resampled because they landed on a kink.
pub fn worst_of(case: Case, seed: u64, trials: usize) -> Result<(f64, usize)> {
    let mut rng = rng::stream(seed, "gradcheck");
    let mut worst: f64 = 0.0;
    let (mut done, mut kinks) = (0, 0);
    while done < trials {
        match case(&mut rng)? {
            Some(e) => {
                worst = worst.max(e);
                done += 1;
            }
            None => kinks += 1,
        }
        if kinks > trials {
            break;
        }
    }
    Ok((worst, kinks))
}

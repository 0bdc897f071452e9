use crate::error::{invalid, Error, Result};
use crate::networks::{GeneratorConfig, Mode, NetworkParams, Session};
use crate::signal::{Shape, Tape, Tensor, Var};

/// Stacks the load batch `(B, 1, M)` with optional weather `(B, W, M)`.
pub fn generator_input(config: &GeneratorConfig, lr: &Tensor, weather: Option<&Tensor>) -> Result<Tensor> {
    let ls = lr.shape();
    if ls.channels != 1 {
        return Err(invalid(format!("load input must have one channel, got {ls}")));
    }
    let input = match weather {
        None => lr.clone(),
        Some(w) => {
            if w.shape().len != ls.len || w.shape().batch != ls.batch {
                return Err(Error::ShapeMismatch {
                    op: "generator weather",
                    left: ls,
                    right: w.shape(),
                });
            }
            Tensor::concat_channels(&[lr, w])?
        }
    };
    if input.shape().channels != config.in_channels {
        return Err(invalid(format!(
            "generator expects {} input channels, got {}",
            config.in_channels,
            input.shape().channels
        )));
    }
    Ok(input)
}

/// Repeats each load sample `factor` times.
fn nearest_upsample_load(input: &Tensor, factor: usize) -> Tensor {
    let s = input.shape();
    let mut data = Vec::with_capacity(s.batch * s.len * factor);
    for b in 0..s.batch {
        for &v in input.row(b, 0) {
            data.extend(std::iter::repeat_n(v, factor));
        }
    }
    Tensor::new(Shape::new(s.batch, 1, s.len * factor), data).expect("sized above")
}

/// Generator graph on `tape`. `input` holds the stacked load and weather
/// channels; the result is `(B, 1, alpha * M)`.
pub fn generator_graph(
    config: &GeneratorConfig,
    session: &mut Session<'_>,
    tape: &mut Tape,
    input: Var,
) -> Result<Var> {
    let outer_pad = config.outer_kernel / 2;
    let inner_pad = config.inner_kernel / 2;
    let h = session.conv(tape, "conv_in", input, 1, outer_pad)?;
    let h = session.batch_norm(tape, "bn_in", h)?;
    let head = tape.relu(h)?;
    let mut h = head;
    for b in 0..config.residual_blocks {
        h = session.residual_block(tape, &format!("res{b}"), h, config.inner_kernel)?;
    }
    let h = session.conv(tape, "conv_mid", h, 1, inner_pad)?;
    let h = session.batch_norm(tape, "bn_mid", h)?;
    let mut h = tape.add(h, head)?;

    let (s1, s2) = config.strides;
    h = session.conv_transpose(tape, "up1", h, s1)?;
    h = session.batch_norm(tape, "bn_up1", h)?;
    h = tape.relu(h)?;
    if s2 > 1 {
        h = session.conv_transpose(tape, "up2", h, s2)?;
        h = session.batch_norm(tape, "bn_up2", h)?;
        h = tape.relu(h)?;
    }
    let mut out = session.conv(tape, "conv_out", h, 1, outer_pad)?;
    if config.input_skip {
        let skip = nearest_upsample_load(tape.value(input), config.alpha());
        let skip = tape.constant(skip);
        out = tape.add(out, skip)?;
    }
    Ok(out)
}

/// Upsamples a batch of low-resolution profiles with frozen parameters
/// (batch norm in eval mode).
pub fn generator_forward(
    config: &GeneratorConfig,
    params: &NetworkParams,
    lr: &Tensor,
    weather: Option<&Tensor>,
) -> Result<Tensor> {
    params.check_arch(config)?;
    let input = generator_input(config, lr, weather)?;
    let mut tape = Tape::new();
    let x = tape.constant(input);
    let mut session = params.bind_eval(&mut tape, false);
    let out = generator_graph(config, &mut session, &mut tape, x)?;
    Ok(tape.value(out).clone())
}

/// Training-mode forward that also advances running statistics.
pub fn generator_forward_train(
    config: &GeneratorConfig,
    params: &mut NetworkParams,
    lr: &Tensor,
    weather: Option<&Tensor>,
) -> Result<Tensor> {
    let input = generator_input(config, lr, weather)?;
    let mut tape = Tape::new();
    let x = tape.constant(input);
    let mut session = params.bind(&mut tape, false, Mode::Train);
    let out = generator_graph(config, &mut session, &mut tape, x)?;
    Ok(tape.value(out).clone())
}

use crate::error::{invalid, Result};
use crate::networks::{NetworkParams, PolisherConfig, Session};
use crate::signal::{Tape, Tensor, Var};

/// `input + correction(input)`; the correction head starts at zero.
pub fn polisher_graph(
    config: &PolisherConfig,
    session: &mut Session<'_>,
    tape: &mut Tape,
    input: Var,
) -> Result<Var> {
    if tape.shape(input).channels != 1 {
        return Err(invalid(format!(
            "polisher expects single-channel profiles, got {}",
            tape.shape(input)
        )));
    }
    let outer_pad = config.outer_kernel / 2;
    let h = session.conv(tape, "conv_in", input, 1, outer_pad)?;
    let h = session.batch_norm(tape, "bn_in", h)?;
    let head = tape.relu(h)?;
    let mut h = head;
    for b in 0..config.residual_blocks {
        h = session.residual_block(tape, &format!("res{b}"), h, config.inner_kernel)?;
    }
    let h = session.conv(tape, "conv_mid", h, 1, config.inner_kernel / 2)?;
    let h = session.batch_norm(tape, "bn_mid", h)?;
    let h = tape.add(h, head)?;
    let correction = session.conv(tape, "conv_out", h, 1, outer_pad)?;
    tape.add(input, correction)
}

/// Polishes a batch of generated profiles `(B, 1, N)` in eval mode.
pub fn polisher_forward(config: &PolisherConfig, params: &NetworkParams, profiles: &Tensor) -> Result<Tensor> {
    params.check_arch(config)?;
    let mut tape = Tape::new();
    let x = tape.constant(profiles.clone());
    let mut session = params.bind_eval(&mut tape, false);
    let out = polisher_graph(config, &mut session, &mut tape, x)?;
    Ok(tape.value(out).clone())
}

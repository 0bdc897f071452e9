use crate::error::{Error, Result};
use crate::networks::{DiscriminatorConfig, NetworkParams, Session};
use crate::signal::{Tape, Tensor, Var};

/// Discriminator outputs on a tape: per-sample scores `(B, 1, 1)` in (0, 1)
/// and the post-activation outputs of the four conv layers.
pub struct DiscriminatorOutput {
    pub score: Var,
    pub features: Vec<Var>,
}

pub fn discriminator_graph(
    config: &DiscriminatorConfig,
    session: &Session<'_>,
    tape: &mut Tape,
    profile: Var,
) -> Result<DiscriminatorOutput> {
    let s = tape.shape(profile);
    if s.len != config.input_len || s.channels != 1 {
        return Err(Error::LengthMismatch {
            op: "discriminator input",
            left: config.input_len,
            right: s.len,
        });
    }
    let pad = config.kernel / 2;
    let mut h = profile;
    let mut features = Vec::with_capacity(4);
    for i in 0..4 {
        h = session.conv(tape, &format!("conv{i}"), h, config.stride, pad)?;
        h = tape.leaky_relu(h, config.leaky_slope)?;
        features.push(h);
    }
    let logit = session.linear(tape, "fc", h)?;
    let score = tape.sigmoid(logit)?;
    Ok(DiscriminatorOutput { score, features })
}

/// Scores a batch of profiles `(B, 1, N)`; returns per-sample probabilities
/// and the four feature maps.
pub fn discriminator_forward(
    config: &DiscriminatorConfig,
    params: &NetworkParams,
    profiles: &Tensor,
) -> Result<(Vec<f64>, Vec<Tensor>)> {
    params.check_arch(config)?;
    let mut tape = Tape::new();
    let x = tape.constant(profiles.clone());
    let session = params.bind_eval(&mut tape, false);
    let out = discriminator_graph(config, &session, &mut tape, x)?;
    let scores = tape.value(out.score).data().to_vec();
    let features = out.features.iter().map(|&f| tape.value(f).clone()).collect();
    Ok((scores, features))
}

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::signal::Shape;

/// How a parameter tensor is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Normal(0, 0.02).
    Normal,
    Zeros,
    Ones,
}

/// Parameter inventory of an architecture.
pub trait Architecture {
    fn kind(&self) -> &'static str;

    /// `(name, shape, init)` for every trainable tensor, in a stable order.
    fn param_specs(&self) -> Vec<(String, Shape, Init)>;

    /// `(layer name, channels)` for every batch-norm layer.
    fn batch_norm_layers(&self) -> Vec<(String, usize)>;

    /// Stable 64-bit digest of the configuration.
    fn fingerprint(&self) -> u64
    where
        Self: std::fmt::Debug,
    {
        let digest = Sha256::digest(format!("{}:v1:{self:?}", self.kind()).as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
    }

    fn param_count(&self) -> usize {
        self.param_specs().iter().map(|(_, s, _)| s.numel()).sum()
    }
}

/// Splits a scale-up factor into two transpose-convolution strides, each at
/// most 4, as balanced as possible. A factor with a unit stage is returned as
/// `(factor, 1)` and built as a single stage.
pub fn strides_for_alpha(alpha: usize) -> Result<(usize, usize)> {
    if alpha < 2 {
        return Err(invalid(format!("scale factor {alpha} must be >= 2")));
    }
    let best = (1..=4)
        .filter(|a| alpha % a == 0 && alpha / a <= 4 && *a <= alpha / a)
        .max()
        .ok_or_else(|| invalid(format!("scale factor {alpha} is not a product of two strides <= 4")))?;
    let other = alpha / best;
    Ok(if best == 1 { (other, 1) } else { (best, other) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// One load channel plus any weather channels.
    pub in_channels: usize,
    pub features: usize,
    pub residual_blocks: usize,
    /// Kernel of the first and last convolutions.
    pub outer_kernel: usize,
    /// Kernel inside residual blocks and the post-residual convolution.
    pub inner_kernel: usize,
    pub strides: (usize, usize),
    /// Add the nearest-neighbour upsampled load channel to the output.
    pub input_skip: bool,
}

impl GeneratorConfig {
    pub fn for_alpha(alpha: usize, weather_channels: usize) -> Result<Self> {
        let cfg = Self {
            in_channels: 1 + weather_channels,
            features: 64,
            residual_blocks: 4,
            outer_kernel: 9,
            inner_kernel: 3,
            strides: strides_for_alpha(alpha)?,
            input_skip: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn alpha(&self) -> usize {
        self.strides.0 * self.strides.1
    }

    pub fn validate(&self) -> Result<()> {
        validate_trunk(self.in_channels, self.features, self.outer_kernel, self.inner_kernel)?;
        let (s1, s2) = self.strides;
        if s1 < 2 || s2 < 1 || s1 > 4 || s2 > 4 {
            return Err(invalid(format!("unsupported transpose strides ({s1}, {s2})")));
        }
        Ok(())
    }
}

fn validate_trunk(in_channels: usize, features: usize, outer: usize, inner: usize) -> Result<()> {
    if in_channels == 0 || features == 0 {
        return Err(invalid("channel counts must be positive"));
    }
    if outer % 2 == 0 || inner % 2 == 0 {
        return Err(invalid(format!(
            "kernels must be odd to preserve length (got {outer} and {inner})"
        )));
    }
    Ok(())
}

fn push_conv(out: &mut Vec<(String, Shape, Init)>, name: &str, out_ch: usize, in_ch: usize, k: usize, init: Init) {
    out.push((format!("{name}.weight"), Shape::new(out_ch, in_ch, k), init));
    out.push((format!("{name}.bias"), Shape::channel_vector(out_ch), Init::Zeros));
}

fn push_bn(out: &mut Vec<(String, Shape, Init)>, name: &str, ch: usize) {
    out.push((format!("{name}.gamma"), Shape::channel_vector(ch), Init::Ones));
    out.push((format!("{name}.beta"), Shape::channel_vector(ch), Init::Zeros));
}

/// Shared conv → residual blocks → conv trunk of the generator and polisher.
fn trunk_specs(out: &mut Vec<(String, Shape, Init)>, in_ch: usize, n: usize, blocks: usize, outer: usize, inner: usize) {
    push_conv(out, "conv_in", n, in_ch, outer, Init::Normal);
    push_bn(out, "bn_in", n);
    for b in 0..blocks {
        push_conv(out, &format!("res{b}.conv1"), n, n, inner, Init::Normal);
        push_bn(out, &format!("res{b}.bn1"), n);
        push_conv(out, &format!("res{b}.conv2"), n, n, inner, Init::Normal);
        push_bn(out, &format!("res{b}.bn2"), n);
    }
    push_conv(out, "conv_mid", n, n, inner, Init::Normal);
    push_bn(out, "bn_mid", n);
}

fn trunk_bn(blocks: usize, n: usize) -> Vec<(String, usize)> {
    let mut v = vec![("bn_in".to_string(), n)];
    for b in 0..blocks {
        v.push((format!("res{b}.bn1"), n));
        v.push((format!("res{b}.bn2"), n));
    }
    v.push(("bn_mid".to_string(), n));
    v
}

impl Architecture for GeneratorConfig {
    fn kind(&self) -> &'static str {
        "generator"
    }

    fn param_specs(&self) -> Vec<(String, Shape, Init)> {
        let n = self.features;
        let mut v = Vec::new();
        trunk_specs(&mut v, self.in_channels, n, self.residual_blocks, self.outer_kernel, self.inner_kernel);
        push_conv(&mut v, "up1", n, n, self.strides.0, Init::Normal);
        push_bn(&mut v, "bn_up1", n);
        if self.strides.1 > 1 {
            push_conv(&mut v, "up2", n, n, self.strides.1, Init::Normal);
            push_bn(&mut v, "bn_up2", n);
        }
        push_conv(&mut v, "conv_out", 1, n, self.outer_kernel, Init::Normal);
        v
    }

    fn batch_norm_layers(&self) -> Vec<(String, usize)> {
        let mut v = trunk_bn(self.residual_blocks, self.features);
        v.push(("bn_up1".into(), self.features));
        if self.strides.1 > 1 {
            v.push(("bn_up2".into(), self.features));
        }
        v
    }
}

/// Four strided conv layers with LeakyReLU, then a fully connected sigmoid head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorConfig {
    pub input_len: usize,
    pub features: [usize; 4],
    pub kernel: usize,
    pub stride: usize,
    pub leaky_slope: f64,
}

impl DiscriminatorConfig {
    pub fn new(input_len: usize) -> Self {
        Self {
            input_len,
            features: [4, 8, 16, 32],
            kernel: 3,
            stride: 2,
            leaky_slope: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.windows(2).any(|w| w[1] <= w[0]) || self.features[0] == 0 {
            return Err(invalid("discriminator feature maps must increase"));
        }
        if self.stride < 2 {
            return Err(invalid("discriminator strides must compress (>= 2)"));
        }
        if self.kernel % 2 == 0 {
            return Err(invalid("discriminator kernel must be odd"));
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return Err(invalid("leaky slope must lie in (0, 1)"));
        }
        if self.feature_lengths()[3] == 0 {
            return Err(invalid(format!("input length {} too short", self.input_len)));
        }
        Ok(())
    }

    /// Lengths after each conv layer.
    pub fn feature_lengths(&self) -> [usize; 4] {
        let pad = self.kernel / 2;
        let mut len = self.input_len;
        let mut out = [0; 4];
        for o in &mut out {
            len = if len == 0 {
                0
            } else {
                (len + 2 * pad - self.kernel) / self.stride + 1
            };
            *o = len;
        }
        out
    }
}

impl Architecture for DiscriminatorConfig {
    fn kind(&self) -> &'static str {
        "discriminator"
    }

    fn param_specs(&self) -> Vec<(String, Shape, Init)> {
        let mut v = Vec::new();
        let mut in_ch = 1;
        for (i, &f) in self.features.iter().enumerate() {
            push_conv(&mut v, &format!("conv{i}"), f, in_ch, self.kernel, Init::Normal);
            in_ch = f;
        }
        let flat = self.features[3] * self.feature_lengths()[3];
        v.push(("fc.weight".into(), Shape::new(1, flat, 1), Init::Normal));
        v.push(("fc.bias".into(), Shape::channel_vector(1), Init::Zeros));
        v
    }

    fn batch_norm_layers(&self) -> Vec<(String, usize)> {
        Vec::new()
    }
}

/// Generator trunk without upsampling, wrapped as `output = input + correction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolisherConfig {
    pub features: usize,
    pub residual_blocks: usize,
    pub outer_kernel: usize,
    pub inner_kernel: usize,
}

impl Default for PolisherConfig {
    fn default() -> Self {
        Self {
            features: 32,
            residual_blocks: 2,
            outer_kernel: 9,
            inner_kernel: 3,
        }
    }
}

impl PolisherConfig {
    pub fn validate(&self) -> Result<()> {
        validate_trunk(1, self.features, self.outer_kernel, self.inner_kernel)
    }
}

impl Architecture for PolisherConfig {
    fn kind(&self) -> &'static str {
        "polisher"
    }

    fn param_specs(&self) -> Vec<(String, Shape, Init)> {
        let mut v = Vec::new();
        trunk_specs(&mut v, 1, self.features, self.residual_blocks, self.outer_kernel, self.inner_kernel);
        // zero correction head: an untrained polisher is the identity
        push_conv(&mut v, "conv_out", 1, self.features, self.outer_kernel, Init::Zeros);
        v
    }

    fn batch_norm_layers(&self) -> Vec<(String, usize)> {
        trunk_bn(self.residual_blocks, self.features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_stride_factorizations() {
        assert_eq!(strides_for_alpha(6).unwrap(), (2, 3));
        assert_eq!(strides_for_alpha(12).unwrap(), (3, 4));
        assert_eq!(strides_for_alpha(3).unwrap(), (3, 1));
        assert_eq!(strides_for_alpha(4).unwrap(), (2, 2));
        assert_eq!(strides_for_alpha(16).unwrap(), (4, 4));
        for bad in [0, 1, 5, 7, 10, 25] {
            assert!(strides_for_alpha(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn even_inner_kernel_rejected() {
        let mut g = GeneratorConfig::for_alpha(6, 0).unwrap();
        g.inner_kernel = 4;
        assert!(g.validate().is_err());
        let p = PolisherConfig {
            inner_kernel: 2,
            ..PolisherConfig::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn discriminator_has_four_growing_layers() {
        let d = DiscriminatorConfig::new(288);
        d.validate().unwrap();
        assert_eq!(d.features, [4, 8, 16, 32]);
        assert_eq!(d.feature_lengths(), [144, 72, 36, 18]);
        let bad = DiscriminatorConfig {
            features: [4, 8, 8, 32],
            ..d
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn generator_param_count_by_hand() {
        // in 2, n 3, 1 block, k 3 / 1, strides (2, 1)
        let g = GeneratorConfig {
            in_channels: 2,
            features: 3,
            residual_blocks: 1,
            outer_kernel: 3,
            inner_kernel: 1,
            strides: (2, 1),
            input_skip: false,
        };
        let conv_in = 2 * 3 * 3 + 3; // 21
        let bn = 2 * 3; // 6 per bn
        let res = 2 * (3 * 3 + 3) + 2 * bn; // 36
        let mid = 3 * 3 + 3; // 12
        let up1 = 3 * 3 * 2 + 3; // 21
        let out = 3 * 3 + 1; // 10
        assert_eq!(g.param_count(), conv_in + bn + res + mid + bn + up1 + bn + out);
        assert_eq!(g.param_count(), 118);
    }

    #[test]
    fn fingerprint_tracks_config() {
        let a = GeneratorConfig::for_alpha(6, 5).unwrap();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.features = 32;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}

//! Flat binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic          8 bytes  "PSRGCKPT"
//! version        u32      1
//! fingerprint    u64      architecture digest
//! alpha          u32      scale-up factor
//! epoch          u32      epochs completed
//! entry_count    u32
//! entry_count times:
//!   kind         u8       0 parameter, 1 running mean, 2 running variance
//!   name_len     u32
//!   name         name_len bytes, UTF-8
//!   shape        3 x u32  (batch, channels, length)
//!   value_count  u64
//!   values       value_count x f64
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::networks::{Architecture, NetworkParams, RunningStats};
use crate::signal::{Shape, Tensor};

pub const MAGIC: &[u8; 8] = b"PSRGCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub alpha: u32,
    pub epoch: u32,
    pub params: NetworkParams,
}

fn ck(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn write_entry<W: Write>(w: &mut W, kind: u8, name: &str, shape: Shape, values: &[f64]) -> Result<()> {
    w.write_all(&[kind])?;
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    for d in [shape.batch, shape.channels, shape.len] {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        buf.write_all(MAGIC)?;
        buf.write_all(&FORMAT_VERSION.to_le_bytes())?;
        buf.write_all(&self.params.fingerprint.to_le_bytes())?;
        buf.write_all(&self.alpha.to_le_bytes())?;
        buf.write_all(&self.epoch.to_le_bytes())?;
        let count = self.params.tensors.len() + 2 * self.params.running.len();
        buf.write_all(&(count as u32).to_le_bytes())?;
        for (name, t) in &self.params.tensors {
            write_entry(&mut buf, 0, name, t.shape(), t.data())?;
        }
        for (name, r) in &self.params.running {
            let shape = Shape::channel_vector(r.mean.len());
            write_entry(&mut buf, 1, name, shape, &r.mean)?;
            write_entry(&mut buf, 2, name, shape, &r.var)?;
        }
        Ok(buf)
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let r = &mut bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| ck("truncated header"))?;
        if &magic != MAGIC {
            return Err(ck("bad magic"));
        }
        let version = read_u32(r)?;
        if version != FORMAT_VERSION {
            return Err(ck(format!("unsupported format version {version}")));
        }
        let fingerprint = read_u64(r)?;
        let alpha = read_u32(r)?;
        let epoch = read_u32(r)?;
        let count = read_u32(r)?;
        let mut tensors = BTreeMap::new();
        let mut means: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut vars: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for _ in 0..count {
            let mut kind = [0u8];
            r.read_exact(&mut kind).map_err(|_| ck("truncated entry"))?;
            let name_len = read_u32(r)? as usize;
            let mut name = vec![0u8; name_len];
            r.read_exact(&mut name).map_err(|_| ck("truncated name"))?;
            let name = String::from_utf8(name).map_err(|_| ck("entry name is not UTF-8"))?;
            let shape = Shape::new(read_u32(r)? as usize, read_u32(r)? as usize, read_u32(r)? as usize);
            let n = read_u64(r)? as usize;
            if n != shape.numel() {
                return Err(ck(format!("entry `{name}`: {n} values for shape {shape}")));
            }
            if r.len() < n * 8 {
                return Err(ck(format!("entry `{name}` truncated")));
            }
            let values: Vec<f64> = r[..n * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            *r = &r[n * 8..];
            let dup = match kind[0] {
                0 => tensors.insert(name.clone(), Tensor::new(shape, values)?).is_some(),
                1 => means.insert(name.clone(), values).is_some(),
                2 => vars.insert(name.clone(), values).is_some(),
                k => return Err(ck(format!("unknown entry kind {k}"))),
            };
            if dup {
                return Err(ck(format!("duplicate entry `{name}`")));
            }
        }
        if !r.is_empty() {
            return Err(ck("trailing bytes"));
        }
        let mut running = BTreeMap::new();
        for (name, mean) in means {
            let var = vars
                .remove(&name)
                .ok_or_else(|| ck(format!("running stats `{name}` lack a variance")))?;
            running.insert(name, RunningStats { mean, var });
        }
        if let Some(name) = vars.keys().next() {
            return Err(ck(format!("running stats `{name}` lack a mean")));
        }
        Ok(Self {
            alpha,
            epoch,
            params: NetworkParams {
                fingerprint,
                tensors,
                running,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Loads and checks the parameters against `arch`, entry by entry.
    pub fn load_for<A: Architecture + std::fmt::Debug>(path: impl AsRef<Path>, arch: &A) -> Result<Self> {
        let ckpt = Self::load(path)?;
        ckpt.params.check_arch(arch).map_err(|e| ck(e.to_string()))?;
        let specs = arch.param_specs();
        if specs.len() != ckpt.params.tensors.len() {
            return Err(ck("parameter inventory does not match the config"));
        }
        for (name, shape, _) in specs {
            match ckpt.params.tensors.get(&name) {
                Some(t) if t.shape() == shape => {}
                _ => return Err(ck(format!("parameter `{name}` missing or misshapen"))),
            }
        }
        Ok(ckpt)
    }
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| ck("truncated integer"))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| ck("truncated integer"))?;
    Ok(u64::from_le_bytes(b))
}

//! Binary checkpoint container.
//!
//! All integers and floats are little-endian. A string is a `u32` byte
//! length followed by UTF-8 bytes.
//!
//! ```text
//! magic            4 bytes  "GRNT"
//! version          u32
//! config           string   TOML
//! domain id        string
//! vocab checksum   string   hex SHA-256 of the vocabulary manifest
//! history length   u32
//!   per epoch      u32 epoch, f64 train loss, f64 validation loss
//! tensor count     u32
//!   per tensor     string name, u32 ndim, ndim x u64 dims, prod(dims) x f64
//! digest           32 bytes SHA-256 of everything above
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{EpochLoss, ModelConfig};
use crate::error::{Error, Result};
use crate::nn::network::TENSOR_NAMES;
use crate::nn::ModelParams;
use crate::planning::DomainVocabulary;

pub const MAGIC: &[u8; 4] = b"GRNT";
pub const CHECKPOINT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub domain_id: String,
    pub vocab_checksum: String,
    pub params: ModelParams,
    pub history: Vec<EpochLoss>,
}

impl Checkpoint {
    pub fn new(
        config: ModelConfig,
        vocab: &DomainVocabulary,
        params: ModelParams,
        history: Vec<EpochLoss>,
    ) -> Self {
        Self {
            config,
            domain_id: vocab.domain_id().to_string(),
            vocab_checksum: vocab.checksum(),
            params,
            history,
        }
    }

    /// Fails unless the checkpoint was trained against `vocab`.
    pub fn ensure_vocabulary(&self, vocab: &DomainVocabulary) -> Result<()> {
        if self.domain_id != vocab.domain_id() || self.vocab_checksum != vocab.checksum() {
            return Err(Error::Incompatible(format!(
                "checkpoint vocabulary {} ({}) does not match {} ({})",
                self.domain_id,
                self.vocab_checksum,
                vocab.domain_id(),
                vocab.checksum()
            )));
        }
        if self.params.num_actions() != vocab.num_actions()
            || self.params.num_fluents() != vocab.num_fluents()
        {
            return Err(Error::Incompatible("tensor shapes do not match the vocabulary".into()));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, CHECKPOINT_VERSION);
        put_str(&mut out, &self.config.to_toml());
        put_str(&mut out, &self.domain_id);
        put_str(&mut out, &self.vocab_checksum);
        put_u32(&mut out, self.history.len() as u32);
        for h in &self.history {
            put_u32(&mut out, h.epoch as u32);
            out.extend_from_slice(&h.train_loss.to_le_bytes());
            out.extend_from_slice(&h.validation_loss.to_le_bytes());
        }
        let shapes = self.params.shapes();
        let slices = self.params.slices();
        put_u32(&mut out, TENSOR_NAMES.len() as u32);
        for ((name, shape), values) in TENSOR_NAMES.iter().zip(&shapes).zip(slices) {
            put_str(&mut out, name);
            put_u32(&mut out, shape.len() as u32);
            for &d in shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 4 + DIGEST_LEN {
            return Err(Error::Corrupt("file is too short".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Corrupt("not a checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(Error::Incompatible(format!(
                "checkpoint format version {version}, expected {CHECKPOINT_VERSION}"
            )));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Corrupt("digest mismatch (truncated or modified)".into()));
        }

        let mut r = Reader { buf: body, pos: 8 };
        let config = ModelConfig::from_toml(&r.string()?)
            .map_err(|e| Error::Corrupt(format!("embedded config: {e}")))?;
        let domain_id = r.string()?;
        let vocab_checksum = r.string()?;
        let n_hist = r.u32()? as usize;
        let mut history = Vec::with_capacity(n_hist.min(1 << 16));
        for _ in 0..n_hist {
            history.push(EpochLoss {
                epoch: r.u32()? as usize,
                train_loss: r.f64()?,
                validation_loss: r.f64()?,
            });
        }
        let n_tensors = r.u32()? as usize;
        if n_tensors != TENSOR_NAMES.len() {
            return Err(Error::Corrupt(format!("{n_tensors} tensors, expected {}", TENSOR_NAMES.len())));
        }
        let mut tensors = Vec::with_capacity(n_tensors);
        for expected in TENSOR_NAMES {
            let name = r.string()?;
            if name != expected {
                return Err(Error::Corrupt(format!("tensor {name:?} where {expected:?} was expected")));
            }
            let ndim = r.u32()? as usize;
            if ndim == 0 || ndim > 2 {
                return Err(Error::Corrupt(format!("tensor {name} has {ndim} dimensions")));
            }
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(usize::try_from(r.u64()?).map_err(|_| Error::Corrupt("dimension overflow".into()))?);
            }
            let count = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .filter(|&c| c.checked_mul(8).is_some_and(|b| b <= r.remaining()))
                .ok_or_else(|| Error::Corrupt(format!("tensor {name} exceeds the file")))?;
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                values.push(r.f64()?);
            }
            tensors.push((shape, values));
        }
        if r.remaining() != 0 {
            return Err(Error::Corrupt(format!("{} unexpected trailing bytes", r.remaining())));
        }
        let params = ModelParams::from_tensors(tensors)
            .map_err(|e| Error::Corrupt(format!("tensor shapes: {e}")))?;
        Ok(Self {
            config,
            domain_id,
            vocab_checksum,
            params,
            history,
        })
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if n > self.remaining() {
            return Err(Error::Corrupt("unexpected end of data".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Corrupt("string is not UTF-8".into()))
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    std::fs::write(path, checkpoint.to_bytes())?;
    Ok(())
}

/// Loads a checkpoint and, when a vocabulary is given, checks that the
/// checkpoint was trained against it.
pub fn load_checkpoint(path: &Path, vocab: Option<&DomainVocabulary>) -> Result<Checkpoint> {
    let ckpt = Checkpoint::from_bytes(&std::fs::read(path)?)?;
    if let Some(v) = vocab {
        ckpt.ensure_vocabulary(v)?;
    }
    Ok(ckpt)
}

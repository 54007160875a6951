//! Binary model files.
//!
//! Layout, little-endian: magic `ESR1`, version `u16`, dims `u16 × 3`
//! (12, 200, 26), then `w1`, `b1`, `w2`, `b2` as `f64`, then 26 label bytes.
//! Nothing may follow the labels.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::{MlpModel, HIDDEN, INPUTS, OUTPUTS};

pub const MAGIC: &[u8; 4] = b"ESR1";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model version {0}")]
    UnsupportedVersion(u16),
    #[error("model file is truncated")]
    TruncatedFile,
    #[error("model file has {0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("model dimensions {0:?} do not match 12/200/26")]
    DimensionMismatch([u16; 3]),
    #[error("parameter {0} is not finite")]
    NonFiniteWeight(usize),
    #[error("label byte {0} is not an ASCII letter")]
    BadLabel(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ModelFileError {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFileError::BadMagic => "BadMagic",
            ModelFileError::UnsupportedVersion(_) => "UnsupportedVersion",
            ModelFileError::TruncatedFile => "TruncatedFile",
            ModelFileError::TrailingBytes(_) => "TrailingBytes",
            ModelFileError::DimensionMismatch(_) => "DimensionMismatch",
            ModelFileError::NonFiniteWeight(_) => "NonFiniteWeight",
            ModelFileError::BadLabel(_) => "BadLabel",
            ModelFileError::Io(_) => "Io",
        }
    }
}

pub fn write_model(m: &MlpModel) -> Result<Vec<u8>, ModelFileError> {
    if let Some(i) = m.params().position(|v| !v.is_finite()) {
        return Err(ModelFileError::NonFiniteWeight(i));
    }
    let mut out = Vec::with_capacity(14 + m.parameter_count() * 8 + OUTPUTS);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [INPUTS, HIDDEN, OUTPUTS] {
        out.extend_from_slice(&(d as u16).to_le_bytes());
    }
    for v in m.params() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&m.labels);
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        if self.buf.len() < n {
            return Err(ModelFileError::TruncatedFile);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16, ModelFileError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, ModelFileError> {
        Ok(self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read_model(bytes: &[u8]) -> Result<MlpModel, ModelFileError> {
    let mut r = Reader { buf: bytes };
    if r.take(4).map_err(|_| ModelFileError::BadMagic)? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(ModelFileError::UnsupportedVersion(version));
    }
    let dims = [r.u16()?, r.u16()?, r.u16()?];
    if dims != [INPUTS as u16, HIDDEN as u16, OUTPUTS as u16] {
        return Err(ModelFileError::DimensionMismatch(dims));
    }
    let m = MlpModel {
        w1: r.f64s(HIDDEN * INPUTS)?,
        b1: r.f64s(HIDDEN)?,
        w2: r.f64s(OUTPUTS * HIDDEN)?,
        b2: r.f64s(OUTPUTS)?,
        labels: r.take(OUTPUTS)?.try_into().unwrap(),
    };
    if !r.buf.is_empty() {
        return Err(ModelFileError::TrailingBytes(r.buf.len()));
    }
    if let Some(i) = m.params().position(|v| !v.is_finite()) {
        return Err(ModelFileError::NonFiniteWeight(i));
    }
    if let Some(i) = m.labels.iter().position(|b| !b.is_ascii_alphabetic()) {
        return Err(ModelFileError::BadLabel(i));
    }
    Ok(m)
}

pub fn save_model(m: &MlpModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    fs::write(path, write_model(m)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel, ModelFileError> {
    read_model(&fs::read(path)?)
}

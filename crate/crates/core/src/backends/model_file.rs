//! Binary n-gram model format (`GLNG`).
//!
//! All integers are little-endian.
//!
//! ```text
//! magic          4 bytes  "GLNG"
//! version        u16      1
//! order          u32
//! discount       f64
//! smoothing      u8       0 = Kneser-Ney, 1 = maximum likelihood
//! unk_threshold  u64
//! vocab_len      u32
//! vocab_len x    { len: u32, utf8 bytes }
//! order x        { entries: u64, entries x { k x u32 token ids, count: u64 } }
//! crc32          u32      over every preceding byte
//! ```
//!
//! Count tables are written for k = 1..=order in ascending lexicographic
//! order of their token ids, so equal models produce equal bytes.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ngram::{NgramModel, Smoothing};
use crate::info::TokenId;

pub const MAGIC: &[u8; 4] = b"GLNG";
pub const VERSION: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelFormatError {
    #[error("not a GLNG model file")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u16),
    #[error("model file truncated at byte {0}")]
    Truncated(usize),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("invalid model: {0}")]
    Invalid(String),
}

pub fn save(model: &NgramModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(model.order() as u32).to_le_bytes());
    out.extend_from_slice(&model.discount().to_le_bytes());
    out.push(match model.smoothing() {
        Smoothing::KneserNey => 0,
        Smoothing::Mle => 1,
    });
    out.extend_from_slice(&model.unk_threshold().to_le_bytes());
    out.extend_from_slice(&(model.vocab().len() as u32).to_le_bytes());
    for piece in model.vocab() {
        out.extend_from_slice(&(piece.len() as u32).to_le_bytes());
        out.extend_from_slice(piece.as_bytes());
    }
    for table in model.counts() {
        out.extend_from_slice(&(table.len() as u64).to_le_bytes());
        for (gram, count) in table {
            for id in gram {
                out.extend_from_slice(&id.to_le_bytes());
            }
            out.extend_from_slice(&count.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(ModelFormatError::Truncated(self.buf.len()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelFormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, ModelFormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, ModelFormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, ModelFormatError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, ModelFormatError> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn load(bytes: &[u8]) -> Result<NgramModel, ModelFormatError> {
    if bytes.len() < MAGIC.len() {
        return Err(ModelFormatError::Truncated(bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err(ModelFormatError::BadMagic);
    }
    if bytes.len() < 10 {
        return Err(ModelFormatError::Truncated(bytes.len()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(ModelFormatError::UnsupportedVersion(version));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(ModelFormatError::ChecksumMismatch { stored, computed });
    }

    let mut r = Reader { buf: body, pos: 6 };
    let order = r.u32()? as usize;
    let discount = r.f64()?;
    let smoothing = match r.u8()? {
        0 => Smoothing::KneserNey,
        1 => Smoothing::Mle,
        other => return Err(ModelFormatError::Invalid(format!("smoothing tag {other}"))),
    };
    let unk_threshold = r.u64()?;
    let vocab_len = r.u32()? as usize;
    if order == 0 || order > 64 {
        return Err(ModelFormatError::Invalid(format!("order {order}")));
    }
    let mut vocab = Vec::with_capacity(vocab_len.min(body.len()));
    for _ in 0..vocab_len {
        let len = r.u32()? as usize;
        let raw = r.take(len)?;
        let piece = std::str::from_utf8(raw).map_err(|_| ModelFormatError::Invalid("vocabulary entry is not UTF-8".into()))?;
        vocab.push(piece.to_owned());
    }
    let mut counts = Vec::with_capacity(order);
    for k in 1..=order {
        let n = r.u64()?;
        let mut table = BTreeMap::new();
        let mut prev: Option<Vec<TokenId>> = None;
        for _ in 0..n {
            let gram = (0..k).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            let count = r.u64()?;
            if prev.as_ref().is_some_and(|p| p >= &gram) {
                return Err(ModelFormatError::Invalid(format!("{k}-gram table is not strictly sorted")));
            }
            prev = Some(gram.clone());
            table.insert(gram, count);
        }
        counts.push(table);
    }
    if r.pos != body.len() {
        return Err(ModelFormatError::Invalid(format!("{} unexpected trailing bytes", body.len() - r.pos)));
    }
    NgramModel::from_parts(order, discount, smoothing, unk_threshold, vocab, counts)
}

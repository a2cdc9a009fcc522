//! Binary embedding file layout (version 1, little-endian):
//!
//! ```text
//! header   magic "ECMU" | version: u32 = 1 | dim: u32 | count: u64
//! record   id: i64 | label: u32 | dim x f32
//! ```
//!
//! The layout is frozen; external exporters write it byte for byte.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vector::{ClassId, Embedding, RecordId, VectorRecord};

pub const MAGIC: [u8; 4] = *b"ECMU";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub dim: u32,
    pub count: u64,
}

impl Header {
    pub fn record_len(&self) -> u64 {
        12 + 4 * u64::from(self.dim)
    }
}

/// Serialises records, narrowing components to `f32`.
pub fn encode(records: &[VectorRecord]) -> Result<Vec<u8>> {
    let Some(first) = records.first() else {
        return Err(Error::InvalidArgument("cannot write an empty record list"));
    };
    let dim = first.vector.dim();
    let dim32 = u32::try_from(dim).map_err(|_| Error::InvalidArgument("dimension exceeds u32"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + records.len() * (12 + 4 * dim));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim32.to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());

    let mut seen = BTreeSet::new();
    for r in records {
        if r.vector.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.vector.dim(),
            });
        }
        if !seen.insert(r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let offset = out.len() as u64;
        out.extend_from_slice(&r.id.0.to_le_bytes());
        out.extend_from_slice(&r.label.0.to_le_bytes());
        for &v in r.vector.values() {
            let narrow = v as f32;
            if !narrow.is_finite() {
                return Err(Error::Data {
                    offset,
                    reason: "component does not fit in f32",
                });
            }
            out.extend_from_slice(&narrow.to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Validates the header against the total length of the buffer.
pub fn decode_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            reason: "bad magic",
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            reason: "truncated header",
        });
    }
    if u32_at(bytes, 4) != VERSION {
        return Err(Error::Format {
            offset: 4,
            reason: "unsupported version",
        });
    }
    let header = Header {
        dim: u32_at(bytes, 8),
        count: u64_at(bytes, 12),
    };
    if header.dim == 0 {
        return Err(Error::Format {
            offset: 8,
            reason: "zero dimension",
        });
    }
    let body = header
        .count
        .checked_mul(header.record_len())
        .and_then(|b| b.checked_add(HEADER_LEN as u64))
        .ok_or(Error::Format {
            offset: 12,
            reason: "record count overflows",
        })?;
    let len = bytes.len() as u64;
    if len < body {
        let complete = (len - HEADER_LEN as u64) / header.record_len();
        let offset = HEADER_LEN as u64 + complete * header.record_len();
        return Err(Error::Format {
            offset,
            reason: "truncated record",
        });
    }
    if len > body {
        return Err(Error::Format {
            offset: body,
            reason: "trailing bytes after last record",
        });
    }
    Ok(header)
}

/// Parses a complete file image, widening components to `f64`.
pub fn decode(bytes: &[u8]) -> Result<Vec<VectorRecord>> {
    let header = decode_header(bytes)?;
    let dim = header.dim as usize;
    let rec_len = header.record_len() as usize;
    let mut out = Vec::with_capacity(header.count as usize);
    let mut seen = BTreeSet::new();
    let mut values = Vec::with_capacity(dim);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(rec_len).enumerate() {
        let offset = (HEADER_LEN + i * rec_len) as u64;
        let id = RecordId(i64::from_le_bytes(chunk[..8].try_into().expect("8 bytes")));
        let label = ClassId(u32_at(chunk, 8));
        values.clear();
        for f in chunk[12..].chunks_exact(4) {
            let v = f32::from_le_bytes(f.try_into().expect("4 bytes"));
            if !v.is_finite() {
                return Err(Error::Data {
                    offset,
                    reason: "non-finite component",
                });
            }
            values.push(v);
        }
        let vector = Embedding::from_f32(&values).map_err(|_| Error::Data {
            offset,
            reason: "zero vector",
        })?;
        if !seen.insert(id) {
            return Err(Error::Data {
                offset,
                reason: "duplicate record id",
            });
        }
        out.push(VectorRecord::new(id, label, vector));
    }
    Ok(out)
}

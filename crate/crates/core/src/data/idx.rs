//! IDX containers of unsigned bytes, optionally gzip-compressed.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{IdxError, Result};

const UNSIGNED_BYTE: u8 = 0x08;

/// A decoded IDX tensor: dimension sizes and the flat row-major payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

impl IdxArray {
    /// Size of one item (product of every dimension but the first).
    pub fn item_len(&self) -> usize {
        self.dims[1..].iter().product()
    }

    pub fn items(&self) -> usize {
        self.dims[0]
    }
}

/// Read an IDX file; names ending in `.gz` are decompressed first.
pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxArray> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        GzDecoder::new(file).read_to_end(&mut bytes)?;
    } else {
        let mut file = file;
        file.read_to_end(&mut bytes)?;
    }
    Ok(parse_idx(&bytes)?)
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray, IdxError> {
    let take = |offset: usize, needed: usize| -> Result<&[u8], IdxError> {
        bytes.get(offset..offset + needed).ok_or(IdxError::Truncated {
            offset,
            needed,
            available: bytes.len().saturating_sub(offset),
        })
    };
    let magic = take(0, 4)?;
    if magic[0] != 0 || magic[1] != 0 {
        return Err(IdxError::BadMagic {
            offset: 0,
            found: [magic[0], magic[1]],
        });
    }
    if magic[2] != UNSIGNED_BYTE {
        return Err(IdxError::UnsupportedType {
            offset: 2,
            code: magic[2],
        });
    }
    let ndims = magic[3] as usize;
    if ndims == 0 {
        return Err(IdxError::NoDimensions { offset: 3 });
    }
    let mut dims = Vec::with_capacity(ndims);
    for k in 0..ndims {
        let b = take(4 + 4 * k, 4)?;
        dims.push(u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize);
    }
    let offset = 4 + 4 * ndims;
    let len: usize = dims.iter().product();
    let data = take(offset, len)?.to_vec();
    let end = offset + len;
    if bytes.len() > end {
        return Err(IdxError::TrailingBytes {
            offset: end,
            extra: bytes.len() - end,
        });
    }
    Ok(IdxArray { dims, data })
}

/// Encode as an uncompressed IDX stream.
pub fn write_idx(mut out: impl Write, array: &IdxArray) -> Result<()> {
    out.write_all(&[0, 0, UNSIGNED_BYTE, array.dims.len() as u8])?;
    for &d in &array.dims {
        out.write_all(&(d as u32).to_be_bytes())?;
    }
    out.write_all(&array.data)?;
    Ok(())
}

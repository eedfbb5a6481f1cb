//! On-disk index format.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size        | field                                  |
//! |--------|-------------|----------------------------------------|
//! | 0      | 4           | magic `b"SIMP"`                        |
//! | 4      | 4           | format version (`u32`, currently 1)    |
//! | 8      | 4           | image height M (`u32`)                 |
//! | 12     | 4           | image width N (`u32`)                  |
//! | 16     | 4           | patch size p (`u32`)                   |
//! | 20     | 8           | patch count N_p (`u64`)                |
//! | 28     | 4           | feature count N_f (`u32`, always 9)    |
//! | 32     | 8 * N_f     | per-column raw minimum (`f64`)         |
//! | ..     | 8 * N_f     | per-column raw maximum (`f64`)         |
//! | ..     | 8 * N_p * N_f | normalized matrix, row-major (`f64`) |

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::features::{FeatureMatrix, NormState, N_FEATURES};
use crate::grid::GridMeta;

pub const MAGIC: [u8; 4] = *b"SIMP";
pub const VERSION: u32 = 1;
const FIXED_HEADER_LEN: usize = 32;
/// Header length including the min/max arrays.
pub const HEADER_LEN: usize = FIXED_HEADER_LEN + 2 * 8 * N_FEATURES;

/// Serialized size of an index with `n_patches` rows.
pub fn file_len(n_patches: usize) -> u64 {
    HEADER_LEN as u64 + payload_len(n_patches as u64)
}

fn payload_len(n_patches: u64) -> u64 {
    n_patches * N_FEATURES as u64 * 8
}

pub fn encode(matrix: &FeatureMatrix, meta: &GridMeta) -> Result<Vec<u8>> {
    let NormState::Normalized { min, max } = matrix.state() else {
        return Err(FormatError::NotNormalized.into());
    };
    if matrix.n_rows() != meta.n_patches() {
        return Err(FormatError::DimensionMismatch(format!(
            "matrix has {} rows but the grid has {} patches",
            matrix.n_rows(),
            meta.n_patches()
        ))
        .into());
    }
    let to_u32 = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::params(format!("{what} {v} does not fit in u32")))
    };
    let mut out = Vec::with_capacity(file_len(matrix.n_rows()) as usize);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(meta.height, "height")?.to_le_bytes());
    out.extend_from_slice(&to_u32(meta.width, "width")?.to_le_bytes());
    out.extend_from_slice(&to_u32(meta.patch_size, "patch size")?.to_le_bytes());
    out.extend_from_slice(&(matrix.n_rows() as u64).to_le_bytes());
    out.extend_from_slice(&(N_FEATURES as u32).to_le_bytes());
    for v in min.iter().chain(max.iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for row in matrix.rows() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Writes atomically: a temporary file in the target directory is renamed over `path`.
pub fn save_index(path: impl AsRef<Path>, matrix: &FeatureMatrix, meta: &GridMeta) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(matrix, meta)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        w.write_all(&bytes).map_err(|e| Error::io(tmp.path(), e))?;
        w.flush().map_err(|e| Error::io(tmp.path(), e))?;
    }
    tmp.as_file()
        .sync_all()
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.bytes[self.pos..self.pos + N]
            .try_into()
            .expect("length checked");
        self.pos += N;
        out
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

/// Parses and validates the fixed part of the header.
fn decode_header(
    bytes: &[u8],
    total_len: u64,
) -> Result<(GridMeta, [f64; N_FEATURES], [f64; N_FEATURES], u64), FormatError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        let mut found = [0u8; 4];
        let n = bytes.len().min(4);
        found[..n].copy_from_slice(&bytes[..n]);
        return Err(FormatError::BadMagic {
            expected: MAGIC,
            found,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::TruncatedHeader {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let mut c = Cursor { bytes, pos: 4 };
    let version = c.u32();
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion {
            found: version,
            supported: VERSION,
        });
    }
    let height = c.u32() as usize;
    let width = c.u32() as usize;
    let patch_size = c.u32() as usize;
    let n_patches = c.u64();
    let n_features = c.u32();
    if n_features as usize != N_FEATURES {
        return Err(FormatError::DimensionMismatch(format!(
            "feature count {n_features}, expected {N_FEATURES}"
        )));
    }
    let meta = GridMeta::new(height, width, patch_size).map_err(|e| {
        FormatError::DimensionMismatch(format!(
            "invalid grid {height}x{width}, p={patch_size}: {e}"
        ))
    })?;
    if meta.n_patches() as u64 != n_patches {
        return Err(FormatError::DimensionMismatch(format!(
            "header declares {n_patches} patches but (M-p+1)(N-p+1) = {}",
            meta.n_patches()
        )));
    }
    let mut min = [0.0; N_FEATURES];
    let mut max = [0.0; N_FEATURES];
    for v in min.iter_mut() {
        *v = c.f64();
    }
    for v in max.iter_mut() {
        *v = c.f64();
    }
    for j in 0..N_FEATURES {
        if !(min[j].is_finite() && max[j].is_finite() && min[j] <= max[j]) {
            return Err(FormatError::ValueOutOfRange(format!(
                "column {j} range [{}, {}]",
                min[j], max[j]
            )));
        }
    }
    let expected = HEADER_LEN as u64 + payload_len(n_patches);
    if total_len < expected {
        return Err(FormatError::TruncatedPayload {
            expected: payload_len(n_patches),
            actual: total_len - HEADER_LEN as u64,
        });
    }
    if total_len > expected {
        return Err(FormatError::TrailingData {
            expected,
            actual: total_len,
        });
    }
    Ok((meta, min, max, n_patches))
}

fn decode_payload(payload: &[u8], n_patches: usize) -> Result<Vec<[f64; N_FEATURES]>, FormatError> {
    let mut rows = Vec::with_capacity(n_patches);
    for (r, chunk) in payload.chunks_exact(8 * N_FEATURES).enumerate() {
        let mut row = [0.0; N_FEATURES];
        for (j, v) in row.iter_mut().enumerate() {
            *v = f64::from_le_bytes(chunk[8 * j..8 * j + 8].try_into().expect("chunk of 8"));
            if !(0.0..=1.0).contains(v) {
                return Err(FormatError::ValueOutOfRange(format!(
                    "row {r}, column {j} holds {v}, expected [0, 1]"
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn decode(bytes: &[u8]) -> Result<(FeatureMatrix, GridMeta)> {
    let (meta, min, max, n) = decode_header(bytes, bytes.len() as u64)?;
    let rows = decode_payload(&bytes[HEADER_LEN..], n as usize)?;
    Ok((FeatureMatrix::from_normalized_parts(rows, min, max), meta))
}

/// Reads an index file. The payload is read only after the header and the
/// file length agree, and never past the declared length.
pub fn load_index(path: impl AsRef<Path>) -> Result<(FeatureMatrix, GridMeta)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let total_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut reader = file.take(HEADER_LEN as u64);
    let mut header = Vec::with_capacity(HEADER_LEN);
    reader
        .read_to_end(&mut header)
        .map_err(|e| Error::io(path, e))?;
    let (meta, min, max, n) = decode_header(&header, total_len)?;

    let mut file = reader.into_inner();
    let mut payload = vec![0u8; payload_len(n) as usize];
    file.read_exact(&mut payload)
        .map_err(|e| Error::io(path, e))?;
    let rows = decode_payload(&payload, n as usize)?;
    Ok((FeatureMatrix::from_normalized_parts(rows, min, max), meta))
}

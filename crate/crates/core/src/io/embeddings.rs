//! Embedding files.
//!
//! Binary layout (little-endian): `"DLEM"`, `u32` version, `u64` rows,
//! `u32` width, `u8` label flag, then the rows as `f32` in row-major order,
//! then one `u32` label per row when the flag is set.
//!
//! CSV layout: a header `f0,...,f{d-1},label` and one row per embedding.

use std::path::Path;

use nalgebra::DMatrix;

use crate::batch::{EmbeddingBatch, LabelId};
use crate::error::{DriftError, Result};
use crate::io::atomic_write;

pub const EMBEDDING_MAGIC: &[u8; 4] = b"DLEM";
pub const EMBEDDING_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 4 + 1;

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a labelled batch, choosing the format by extension (`.csv` or
/// binary).
pub fn read_embeddings(path: &Path) -> Result<EmbeddingBatch> {
    let (vectors, labels) = if is_csv(path) {
        read_embeddings_csv(path)?
    } else {
        read_embeddings_binary(path)?
    };
    let labels = labels.ok_or_else(|| {
        DriftError::InvalidInput(format!("{} carries no labels", path.display()))
    })?;
    EmbeddingBatch::new(vectors, labels)
}

/// Writes a batch, choosing the format by extension.
pub fn write_embeddings(path: &Path, batch: &EmbeddingBatch) -> Result<()> {
    if is_csv(path) {
        write_embeddings_csv(path, batch.vectors(), Some(batch.labels()))
    } else {
        write_embeddings_binary(path, batch.vectors(), Some(batch.labels()))
    }
}

pub fn encode_binary(vectors: &DMatrix<f32>, labels: Option<&[LabelId]>) -> Result<Vec<u8>> {
    let (m, d) = vectors.shape();
    if let Some(l) = labels {
        if l.len() != m {
            return Err(DriftError::Dimension {
                expected: m,
                got: l.len(),
            });
        }
    }
    let d32 = u32::try_from(d).map_err(|_| DriftError::InvalidInput("width exceeds u32".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * m * d + labels.map_or(0, |_| 4 * m));
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    out.extend_from_slice(&d32.to_le_bytes());
    out.push(labels.is_some() as u8);
    for i in 0..m {
        for j in 0..d {
            out.extend_from_slice(&vectors[(i, j)].to_le_bytes());
        }
    }
    if let Some(l) = labels {
        for &x in l {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<(DMatrix<f32>, Option<Vec<LabelId>>)> {
    if bytes.len() < 4 || &bytes[..4] != EMBEDDING_MAGIC {
        return Err(DriftError::Format("not an embedding file (bad magic)".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(DriftError::CorruptFile("truncated header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != EMBEDDING_VERSION {
        return Err(DriftError::Format(format!(
            "unsupported embedding file version {version}"
        )));
    }
    let m = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let d = u32_at(16) as usize;
    let has_labels = match bytes[20] {
        0 => false,
        1 => true,
        b => return Err(DriftError::CorruptFile(format!("bad label flag {b}"))),
    };
    let m = usize::try_from(m).map_err(|_| DriftError::CorruptFile("row count overflow".into()))?;
    let expected = m
        .checked_mul(d)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(if has_labels { 4 * m } else { 0 }))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| DriftError::CorruptFile("size overflow".into()))?;
    if bytes.len() != expected {
        return Err(DriftError::CorruptFile(format!(
            "payload is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..];
    let mut bad = None;
    let vectors = DMatrix::from_fn(m, d, |i, j| {
        let o = 4 * (i * d + j);
        let v = f32::from_le_bytes(body[o..o + 4].try_into().unwrap());
        if !v.is_finite() && bad.is_none() {
            bad = Some((i, j));
        }
        v
    });
    if let Some((i, j)) = bad {
        return Err(DriftError::InvalidInput(format!(
            "non-finite value at row {i}, column {j}"
        )));
    }
    let labels = has_labels.then(|| {
        body[4 * m * d..]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    });
    Ok((vectors, labels))
}

pub fn write_embeddings_binary(
    path: &Path,
    vectors: &DMatrix<f32>,
    labels: Option<&[LabelId]>,
) -> Result<()> {
    atomic_write(path, &encode_binary(vectors, labels)?)
}

pub fn read_embeddings_binary(path: &Path) -> Result<(DMatrix<f32>, Option<Vec<LabelId>>)> {
    decode_binary(&std::fs::read(path)?)
}

fn csv_err(e: csv::Error) -> DriftError {
    DriftError::Format(format!("csv: {e}"))
}

pub fn write_embeddings_csv(
    path: &Path,
    vectors: &DMatrix<f32>,
    labels: Option<&[LabelId]>,
) -> Result<()> {
    let (m, d) = vectors.shape();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    let mut rec = Vec::with_capacity(d + 1);
    for i in 0..m {
        rec.clear();
        rec.extend((0..d).map(|j| vectors[(i, j)].to_string()));
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| DriftError::Io(std::io::Error::other(e.to_string())))?;
    atomic_write(path, &bytes)
}

pub fn read_embeddings_csv(path: &Path) -> Result<(DMatrix<f32>, Option<Vec<LabelId>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    let has_labels = header.iter().last() == Some("label");
    let d = header.len() - has_labels as usize;
    if d == 0 {
        return Err(DriftError::Format("csv has no feature columns".into()));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for j in 0..d {
            let v: f32 = rec[j].trim().parse().map_err(|e| {
                DriftError::Format(format!("row {i}, column {j}: `{}`: {e}", &rec[j]))
            })?;
            if !v.is_finite() {
                return Err(DriftError::InvalidInput(format!(
                    "non-finite value at row {i}, column {j}"
                )));
            }
            data.push(v);
        }
        if has_labels {
            labels.push(rec[d].trim().parse::<LabelId>().map_err(|e| {
                DriftError::Format(format!("row {i}: bad label `{}`: {e}", &rec[d]))
            })?);
        }
    }
    let m = data.len() / d;
    Ok((
        DMatrix::from_row_slice(m, d, &data),
        has_labels.then_some(labels),
    ))
}

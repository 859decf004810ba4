//! File formats: embeddings (binary and CSV), model bundles, stream
//! directories and JSON config files. Every write goes through a temporary
//! file in the destination directory that is renamed into place.

pub mod bundle;
pub mod config;
pub mod embeddings;
pub(crate) mod nonfinite;
pub mod stream;

use std::io::Write;
use std::path::Path;

use crate::error::{DriftError, Result};

pub use bundle::{load_bundle, save_bundle, BundleMetadata, LoadedBundle, ModelBundle, BUNDLE_VERSION};
pub use config::ConfigFile;
pub use embeddings::{
    read_embeddings, read_embeddings_binary, read_embeddings_csv, write_embeddings,
    write_embeddings_binary, write_embeddings_csv, EMBEDDING_VERSION,
};
pub use stream::{load_stream_windows, read_stream_dir, write_stream_dir, ManifestEntry, StreamEntry, StreamManifest};

/// Writes `bytes` to `path` atomically (temp file + rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| DriftError::Io(e.error))?;
    Ok(())
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| DriftError::Format(format!("json: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Serializes `value` as pretty JSON and writes it atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    atomic_write(path, &to_json(value)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| DriftError::Format(format!("{}: {e}", path.display())))
}

//! Stream directories: one embedding file per window, replayed in
//! lexicographic file-name order, plus an optional `manifest.json` that
//! supplies timestamps and ground truth.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::batch::EmbeddingBatch;
use crate::error::{DriftError, Result};
use crate::io::{embeddings, read_json, write_json};
use crate::online::StreamWindow;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    /// Whether the window contains any drifted rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<bool>,
    /// Injected drift percentage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_pct: Option<f64>,
    /// Row indices that came from the drift pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drifted_rows: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub windows: Vec<ManifestEntry>,
}

/// A window file with whatever the manifest says about it.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamEntry {
    pub path: PathBuf,
    pub meta: ManifestEntry,
}

fn is_window_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "dlem" | "bin" | "csv"))
}

/// Lists the window files of `dir` in replay order.
pub fn read_stream_dir(dir: &Path) -> Result<Vec<StreamEntry>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut meta: HashMap<String, ManifestEntry> = HashMap::new();
    if manifest_path.exists() {
        let m: StreamManifest = read_json(&manifest_path)?;
        for e in m.windows {
            meta.insert(e.file.clone(), e);
        }
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| is_window_file(p));
    files.sort();
    if files.is_empty() {
        return Err(DriftError::InsufficientData(format!(
            "no window files in {}",
            dir.display()
        )));
    }
    Ok(files
        .into_iter()
        .map(|path| {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let meta = meta.remove(&name).unwrap_or(ManifestEntry {
                file: name,
                ..ManifestEntry::default()
            });
            StreamEntry { path, meta }
        })
        .collect())
}

/// Reads the window files of `entries`.
pub fn load_stream_windows(entries: &[StreamEntry]) -> Result<Vec<StreamWindow>> {
    entries
        .iter()
        .map(|e| {
            Ok(StreamWindow {
                batch: embeddings::read_embeddings(&e.path)?,
                timestamp: e.meta.timestamp.clone(),
            })
        })
        .collect()
}

/// Writes `windows` as `window_00001.dlem`, ... and a manifest. `meta[i]`
/// is stored for window `i`; its `file` field is filled in.
pub fn write_stream_dir(
    dir: &Path,
    windows: &[EmbeddingBatch],
    meta: Vec<ManifestEntry>,
    description: Option<String>,
) -> Result<StreamManifest> {
    if meta.len() != windows.len() {
        return Err(DriftError::Dimension {
            expected: windows.len(),
            got: meta.len(),
        });
    }
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(windows.len());
    for (i, (w, mut m)) in windows.iter().zip(meta).enumerate() {
        let name = format!("window_{:05}.dlem", i + 1);
        embeddings::write_embeddings(&dir.join(&name), w)?;
        m.file = name;
        entries.push(m);
    }
    let manifest = StreamManifest {
        description,
        windows: entries,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

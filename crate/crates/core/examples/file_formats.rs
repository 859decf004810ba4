//! Embedding files (binary and CSV), stream directories with a manifest,
//! and reading them back.
//!
//! `cargo run --example file_formats -- [out_dir]`

use embdrift::eval::{build_stream, DriftSchedule, SynthConfig, SynthSource};
use embdrift::io::{
    load_stream_windows, read_embeddings, read_stream_dir, write_embeddings, write_stream_dir, ManifestEntry,
};

fn main() -> embdrift::Result<()> {
    let out: std::path::PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("embdrift-formats"));
    std::fs::create_dir_all(&out)?;

    let source = SynthSource::new(SynthConfig { dim: 8, ..SynthConfig::default() })?;
    let pools = source.pools(50, 1)?;
    for name in ["pool.dlem", "pool.csv"] {
        let path = out.join(name);
        write_embeddings(&path, &pools.nondrift)?;
        let back = read_embeddings(&path)?;
        assert_eq!(back, pools.nondrift);
        println!("{}: {} rows × {} dims, {} bytes", path.display(), back.len(), back.dim(), std::fs::metadata(&path)?.len());
    }

    let schedule = DriftSchedule::new(vec![0.0, 0.0, 30.0, 30.0])?;
    let stream = build_stream(&pools, &schedule, 40, 2)?;
    let meta = (0..stream.len())
        .map(|i| ManifestEntry {
            file: String::new(),
            timestamp: Some(format!("2024-03-01T00:{:02}:00Z", i * 5)),
            truth: Some(stream.truth[i]),
            drift_pct: Some(stream.drift_pct[i]),
            drifted_rows: Some(
                (0..40u32).filter(|&r| stream.drifted_rows[i][r as usize]).collect(),
            ),
        })
        .collect();
    let dir = out.join("stream");
    let manifest = write_stream_dir(&dir, &stream.windows, meta, Some("four-window demo".into()))?;
    for e in &manifest.windows {
        println!("  {} drift {:?}%", e.file, e.drift_pct.unwrap_or_default());
    }
    let windows = load_stream_windows(&read_stream_dir(&dir)?)?;
    println!("read back {} windows; first timestamp {:?}", windows.len(), windows[0].timestamp);
    Ok(())
}

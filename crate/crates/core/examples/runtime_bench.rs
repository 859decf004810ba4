//! Per-window analysis time as window size and embedding width grow.
//!
//! `cargo run --release --example runtime_bench`

use embdrift::eval::{benchmark_runtime, write_bench_table, BenchConfig};

fn main() -> embdrift::Result<()> {
    let config = BenchConfig {
        window_sizes: vec![1000, 5000, 10_000],
        dims: vec![256, 1000],
        baseline_rows: vec![5000],
        repeats: 3,
        ..BenchConfig::default()
    };
    let rows = benchmark_runtime(&config)?;
    write_bench_table(&rows, std::io::stdout().lock())?;
    Ok(())
}

//! Evaluation harness: drift patterns, stream simulation, detection and
//! correlation metrics, synthetic embeddings and runtime benchmarks.

pub mod bench;
pub mod metrics;
pub mod patterns;
pub mod protocol;
pub mod stream;
pub mod synth;

pub use bench::{benchmark_runtime, write_bench_table, BenchConfig, BenchRow};
pub use metrics::{
    average_ranks, evaluate_detection, h_dd, spearman_corr, DetectionReport, SeverityAccuracy,
    SeverityFlags,
};
pub use patterns::{generate_pattern, DriftSchedule, Pattern};
pub use protocol::{
    pattern_correlation, severity_sweep, synth_run_data, PatternRun, RunData, SweepConfig,
    SweepReport, SweepRun, SynthSplit,
};
pub use stream::{build_stream, drift_rows, sample_window, SamplePools, SimulatedStream};
pub use synth::{synth_pools, SynthConfig, SynthSource};

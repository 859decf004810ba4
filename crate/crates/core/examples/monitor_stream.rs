//! Online phase: replay a stream with sudden drift through a detector and
//! write the distance curves and charts.
//!
//! `cargo run --example monitor_stream -- [out_dir]`

use embdrift::eval::{build_stream, generate_pattern, synth_run_data, Pattern, SynthConfig, SynthSource, SynthSplit};
use embdrift::online::render_monitor;
use embdrift::{estimate_thresholds, fit_baseline, run_stream, DistanceKind, OfflineConfig};

fn main() -> embdrift::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("embdrift-monitor"));

    let source = SynthSource::new(SynthConfig { dim: 128, ..SynthConfig::default() })?;
    let split = SynthSplit { historical: 2000, threshold: 2000, stream: 2000 };
    let data = synth_run_data(&source, split, 3)?;
    let config = OfflineConfig { d_prime: 24, d_prime_label: 12, n_th: 1000, window_size: 500, ..OfflineConfig::default() };
    let baseline = fit_baseline(&data.historical, &config)?;
    let thresholds = estimate_thresholds(&baseline, &data.threshold, DistanceKind::Fdd, &config)?;

    let pattern = Pattern::Sudden { total: 30, onset: 15, level: 20.0 };
    let stream = build_stream(&data.stream, &generate_pattern(&pattern)?, 500, 4)?;
    let log = run_stream(&baseline, &thresholds, &stream.windows)?;

    println!("window  drift%  distance  flagged  per-label flags");
    for (r, pct) in log.reports().iter().zip(&stream.drift_pct) {
        let labels: String = r
            .label_entries
            .iter()
            .map(|e| if e.drift { '!' } else { '.' })
            .collect();
        println!(
            "{:>6}  {:>6.1}  {:>8.4}  {:>7}  {labels}",
            r.window_id,
            pct,
            r.batch_distance.unwrap_or(f64::NAN),
            r.batch_drift
        );
    }
    let files = render_monitor(&log, &out)?;
    println!("curves: {}\ncharts: {}, {}", files.curve_file.display(), files.batch_chart.display(), files.label_chart.display());
    Ok(())
}

//! How the trimming fraction trades false alarms against sensitivity.
//! Distances are sampled once and re-thresholded for each fraction.

use embdrift::eval::{build_stream, DriftSchedule, SynthConfig, SynthSource, SynthSplit, synth_run_data};
use embdrift::offline::{sample_threshold_distances, thresholds_from_samples};
use embdrift::{fit_baseline, run_stream, DistanceKind, OfflineConfig};

fn main() -> embdrift::Result<()> {
    let source = SynthSource::new(SynthConfig { dim: 128, drift_shift: 4.0, ..SynthConfig::default() })?;
    let split = SynthSplit { historical: 2000, threshold: 2000, stream: 2000 };
    let data = synth_run_data(&source, split, 5)?;
    let config = OfflineConfig { d_prime: 24, d_prime_label: 12, n_th: 2000, window_size: 500, ..OfflineConfig::default() };
    let baseline = fit_baseline(&data.historical, &config)?;
    let samples = sample_threshold_distances(&baseline, &data.threshold, DistanceKind::Fdd, &config)?;

    let clean = build_stream(&data.stream, &DriftSchedule::constant(0.0, 200)?, 500, 6)?;
    let mild = build_stream(&data.stream, &DriftSchedule::constant(5.0, 200)?, 500, 7)?;
    let any_t = thresholds_from_samples(&baseline, &samples, DistanceKind::Fdd, &config);
    let clean_d = run_stream(&baseline, &any_t, &clean.windows)?.batch_curve();
    let mild_d = run_stream(&baseline, &any_t, &mild.windows)?.batch_curve();
    let rate = |d: &[f64], t: f64| d.iter().filter(|&&x| x > t).count() as f64 / d.len() as f64;

    println!("t_alpha  threshold  false-alarm rate  detection at 5%");
    for t_alpha in [0.0, 0.01, 0.05, 0.1, 0.25] {
        let t = thresholds_from_samples(&baseline, &samples, DistanceKind::Fdd, &OfflineConfig { t_alpha, ..config.clone() });
        println!(
            "{t_alpha:>7.2}  {:>9.4}  {:>16.3}  {:>15.3}",
            t.t_batch,
            rate(&clean_d, t.t_batch),
            rate(&mild_d, t.t_batch)
        );
    }
    Ok(())
}

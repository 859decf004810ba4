//! Sudden, incremental and periodic drift: how well the batch distance
//! curve tracks the injected drift percentage (Spearman correlation).

use embdrift::eval::{generate_pattern, pattern_correlation, synth_run_data, Pattern, SynthConfig, SynthSource, SynthSplit};
use embdrift::{estimate_thresholds, fit_baseline, DistanceKind, OfflineConfig};

fn sparkline(values: &[f64]) -> String {
    let bars = ['▁', '▂', '▃', '▄', '▅', '▆', '▇', '█'];
    let max = values.iter().cloned().fold(f64::MIN, f64::max).max(1e-12);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    values
        .iter()
        .map(|v| bars[(((v - min) / (max - min).max(1e-12)) * 7.0).round() as usize])
        .collect()
}

fn main() -> embdrift::Result<()> {
    let source = SynthSource::new(SynthConfig { dim: 128, ..SynthConfig::default() })?;
    let split = SynthSplit { historical: 2000, threshold: 2000, stream: 3000 };
    let data = synth_run_data(&source, split, 21)?;
    let config = OfflineConfig { d_prime: 24, d_prime_label: 12, n_th: 1000, window_size: 500, ..OfflineConfig::default() };
    let baseline = fit_baseline(&data.historical, &config)?;
    let thresholds = estimate_thresholds(&baseline, &data.threshold, DistanceKind::Fdd, &config)?;

    for pattern in [Pattern::sudden(), Pattern::incremental(), Pattern::periodic()] {
        let (run, _) = pattern_correlation(&baseline, &thresholds, &data.stream, &pattern, 500, 5)?;
        println!("{:<12} spearman {:.3}", pattern.name(), run.spearman);
        println!("  injected {}", sparkline(generate_pattern(&pattern)?.values()));
        println!("  distance {}", sparkline(&run.batch_distance));
    }
    Ok(())
}

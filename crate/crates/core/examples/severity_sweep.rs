//! Detection accuracy per drift severity and the harmonic mean of the
//! no-drift and drift accuracies, pooled over repetitions.
//!
//! `cargo run --example severity_sweep -- [fdd|kl|js|mahalanobis|bhattacharyya]`

use embdrift::eval::{severity_sweep, synth_run_data, SweepConfig, SynthConfig, SynthSource, SynthSplit};
use embdrift::{DistanceKind, OfflineConfig};

fn main() -> embdrift::Result<()> {
    let metric: DistanceKind = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => DistanceKind::Fdd,
    };
    let source = SynthSource::new(SynthConfig { dim: 128, ..SynthConfig::default() })?;
    let split = SynthSplit { historical: 2000, threshold: 2000, stream: 2000 };
    let config = SweepConfig {
        severities: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        windows_per_level: 50,
        repetitions: 3,
        metric,
        offline: OfflineConfig { d_prime: 24, d_prime_label: 12, n_th: 1000, window_size: 500, ..OfflineConfig::default() },
        seed: 2,
    };
    let report = severity_sweep(&config, |seed| synth_run_data(&source, split, seed))?;
    println!("metric {}", report.metric.name());
    for level in &report.pooled.levels {
        println!("  {:>4}% drift: accuracy {:.3} over {} windows", level.drift_pct, level.accuracy, level.windows);
    }
    println!(
        "A0 {:.3}  A_drift {:.3}  H_DD {:.3} (mean over runs {:.3})",
        report.pooled.a_nodrift,
        report.pooled.a_drift,
        report.pooled.h_dd,
        report.mean_h_dd()
    );
    Ok(())
}

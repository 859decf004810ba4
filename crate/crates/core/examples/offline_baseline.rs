//! Offline phase: fit the baseline on historical embeddings, estimate
//! thresholds on a disjoint set, and save both as one model bundle.
//!
//! `cargo run --example offline_baseline -- [out.dlmb]`

use embdrift::eval::{SynthConfig, SynthSource};
use embdrift::io::{load_bundle, save_bundle, ModelBundle};
use embdrift::{estimate_thresholds, fit_baseline, DistanceKind, OfflineConfig};
use rand::SeedableRng;

fn main() -> embdrift::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("embdrift-baseline.dlmb"));

    let source = SynthSource::new(SynthConfig { dim: 128, ..SynthConfig::default() })?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let historical = source.sample_nondrift(2000, &mut rng);
    let threshold_data = source.sample_nondrift(2000, &mut rng);

    let config = OfflineConfig {
        d_prime: 24,
        d_prime_label: 12,
        n_th: 2000,
        t_alpha: 0.01,
        window_size: 500,
        seed: 11,
        labels: None,
    };
    let baseline = fit_baseline(&historical, &config)?;
    println!(
        "baseline over labels {:?}: batch PCA keeps {:.1}% of variance",
        baseline.label_set(),
        100.0 * baseline.batch_pca().explained_variance().sum()
            / historical.to_f64().row_variance().sum()
    );

    let thresholds = estimate_thresholds(&baseline, &threshold_data, DistanceKind::Fdd, &config)?;
    println!("batch threshold {:.4}", thresholds.t_batch);
    for (label, t) in &thresholds.t_label {
        println!("label {label} threshold {t:.4}");
    }

    save_bundle(&out, &ModelBundle::new(baseline, Some(thresholds), None))?;
    let loaded = load_bundle(&out)?;
    println!(
        "saved {} (hash {}…, {} warnings)",
        out.display(),
        &loaded.bundle.metadata.config_hash[..12],
        loaded.warnings.len()
    );
    Ok(())
}

//! The synthetic embedding source used by the evaluation harness: labelled
//! Gaussian clusters plus one drift component next to a host label.

use embdrift::eval::{SynthConfig, SynthSource};
use rand::SeedableRng;

fn main() -> embdrift::Result<()> {
    let source = SynthSource::new(SynthConfig { n_labels: 4, dim: 32, ..SynthConfig::default() })?;
    let means = source.label_means();
    println!("pairwise distances between label means:");
    for (i, a) in means.iter().enumerate() {
        let row: Vec<String> = means.iter().map(|b| format!("{:5.2}", (a - b).norm())).collect();
        println!("  label {i}: {}", row.join(" "));
    }
    let host = source.config().drift_host as usize;
    let drift = source.drift_mean();
    println!(
        "drift mean: {:.2} from its host label {host}, nearest other label at {:.2}",
        (drift - &means[host]).norm(),
        means
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != host)
            .map(|(_, m)| (drift - m).norm())
            .fold(f64::INFINITY, f64::min)
    );

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let clean = source.sample_nondrift(100, &mut rng);
    let drifted = source.sample_drift(100, &mut rng);
    println!("clean batch labels {:?}; drift rows labelled {:?}", clean.label_set(), drifted.label_set());
    Ok(())
}

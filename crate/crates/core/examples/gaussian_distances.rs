//! Distances between two Gaussians fitted to embedding-like data.
//!
//! The window Gaussian drifts away from the reference step by step; every
//! supported metric grows with the shift.

use embdrift::stats::{alt_distance, estimate_gaussian, DistanceKind};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn sample(n: usize, d: usize, shift: f64, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, j| {
        let z: f64 = StandardNormal.sample(rng);
        z + if j == 0 { shift } else { 0.0 }
    })
}

fn main() -> embdrift::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let d = 16;
    let reference = estimate_gaussian(&sample(5000, d, 0.0, &mut rng))?;
    let kinds = [
        DistanceKind::Fdd,
        DistanceKind::Kl,
        DistanceKind::Js,
        DistanceKind::Mahalanobis,
        DistanceKind::Bhattacharyya,
    ];
    print!("{:>6}", "shift");
    for k in kinds {
        print!("{:>15}", k.name());
    }
    println!();
    for shift in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let window = estimate_gaussian(&sample(1000, d, shift, &mut rng))?;
        print!("{shift:>6.2}");
        for k in kinds {
            // the reference is always the second argument
            print!("{:>15.5}", alt_distance(k, &window, &reference)?);
        }
        println!();
    }
    Ok(())
}

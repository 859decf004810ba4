use embdrift::eval::{SynthConfig, SynthSource};
use embdrift::io::{bundle::BUNDLE_MAGIC, load_bundle, save_bundle, ModelBundle, BUNDLE_VERSION};
use embdrift::{estimate_thresholds, fit_baseline, DistanceKind, DriftError, OfflineConfig};
use rand::SeedableRng;

fn bundle() -> ModelBundle {
    let source = SynthSource::new(SynthConfig { dim: 20, ..SynthConfig::default() }).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let cfg = OfflineConfig {
        d_prime: 5,
        d_prime_label: 3,
        n_th: 50,
        window_size: 60,
        ..OfflineConfig::default()
    };
    let baseline = fit_baseline(&source.sample_nondrift(100, &mut rng), &cfg).unwrap();
    let t = estimate_thresholds(&baseline, &source.sample_nondrift(100, &mut rng), DistanceKind::Kl, &cfg).unwrap();
    ModelBundle::new(baseline, Some(t), Some("2024-05-01T12:00:00Z".into()))
}

#[test]
fn save_load_is_exact() {
    let b = bundle();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.dlmb");
    save_bundle(&path, &b).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], BUNDLE_MAGIC);
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), BUNDLE_VERSION);
    let loaded = load_bundle(&path).unwrap();
    assert!(loaded.warnings.is_empty());
    assert_eq!(loaded.bundle, b);
    assert_eq!(loaded.bundle.encode().unwrap(), bytes);
}

#[test]
fn tampered_hash_warns() {
    let mut b = bundle();
    b.metadata.config_hash = "0".repeat(64);
    let loaded = ModelBundle::decode(&b.encode().unwrap()).unwrap();
    assert_eq!(loaded.warnings.len(), 1);
    assert!(loaded.warnings[0].contains("config hash mismatch"));
}

#[test]
fn header_and_body_errors() {
    let bytes = bundle().encode().unwrap();

    let mut wrong_version = bytes.clone();
    wrong_version[4..8].copy_from_slice(&(BUNDLE_VERSION + 1).to_le_bytes());
    assert!(matches!(
        ModelBundle::decode(&wrong_version),
        Err(DriftError::Version { found, expected }) if found == BUNDLE_VERSION + 1 && expected == BUNDLE_VERSION
    ));

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(ModelBundle::decode(&bad_magic), Err(DriftError::Format(_))));

    assert!(matches!(
        ModelBundle::decode(&bytes[..bytes.len() / 2]),
        Err(DriftError::CorruptFile(_))
    ));
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(ModelBundle::decode(&trailing), Err(DriftError::CorruptFile(_))));
}

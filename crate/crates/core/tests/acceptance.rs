//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p embdrift --test acceptance`.
//!
//! Set `ACCEPTANCE_ONLY=5,7` to run a subset.

use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use embdrift::eval::{
    pattern_correlation, severity_sweep, synth_run_data, DetectionReport, Pattern, SweepConfig,
    SynthConfig, SynthSource, SynthSplit,
};
use embdrift::eval::bench::{open_thresholds, summarize, time_analyze};
use embdrift::explain::{explain_window, purity, ExplainConfig, ExplanationReport};
use embdrift::io::{load_bundle, save_bundle, ModelBundle};
use embdrift::offline::{sample_threshold_distances, thresholds_from_samples};
use embdrift::stats::{alt_distance, fdd, DistanceKind};
use embdrift::{
    estimate_thresholds, fit_baseline, run_stream, Detector, GaussianSummary,
    OfflineConfig,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn g1(mu: f64, sigma: f64) -> GaussianSummary {
    GaussianSummary::new(
        DVector::from_element(1, mu),
        DMatrix::from_element(1, 1, sigma * sigma),
        2,
    )
    .unwrap()
}

fn random_gaussian(rng: &mut ChaCha8Rng, d: usize) -> GaussianSummary {
    let mean = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
    let a = DMatrix::from_fn(d, d + 2, |_, _| rng.random_range(-1.0..1.0));
    let cov = &a * a.transpose() / (d as f64) + DMatrix::identity(d, d) * 0.05;
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianSummary::new(mean, cov, 100).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (ma, mb) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let (sa, sb) = (rng.random_range(0.1..4.0), rng.random_range(0.1..4.0));
        let oracle = (ma - mb) * (ma - mb) + (sa - sb) * (sa - sb);
        let got = fdd(&g1(ma, sa), &g1(mb, sb)).map_err(e2s)?;
        worst = worst.max((got - oracle).abs());
    }
    check(worst <= 1e-9, format!("1-D oracle error {worst:e} > 1e-9"))?;
    let mut self_max = 0.0f64;
    let mut sym_max = 0.0f64;
    for d in [2, 5, 10, 32] {
        for _ in 0..5 {
            let a = random_gaussian(&mut rng, d);
            let b = random_gaussian(&mut rng, d);
            self_max = self_max.max(fdd(&a, &a).map_err(e2s)?);
            let ab = fdd(&a, &b).map_err(e2s)?;
            let ba = fdd(&b, &a).map_err(e2s)?;
            sym_max = sym_max.max((ab - ba).abs() / ab.abs().max(1e-300));
        }
    }
    check(self_max <= 1e-8, format!("fdd(a,a) = {self_max:e} > 1e-8"))?;
    check(sym_max <= 1e-7, format!("asymmetry {sym_max:e} > 1e-7"))?;
    Ok(format!(
        "1-D max err {worst:.1e}, fdd(a,a) max {self_max:.1e}, rel asymmetry max {sym_max:.1e}"
    ))
}

fn criterion_2() -> Outcome {
    let r = DetectionReport::from_accuracies(&[
        (0.0, 0.99),
        (5.0, 0.83),
        (10.0, 1.00),
        (15.0, 1.00),
        (20.0, 1.00),
    ])
    .map_err(e2s)?;
    check((r.h_dd - 0.97).abs() <= 0.005, format!("H_DD = {:.4}", r.h_dd))?;
    Ok(format!("H_DD = {:.4} (target 0.97 ± 0.005)", r.h_dd))
}

/// Majority count per cluster by explicit enumeration of members.
fn purity_oracle(assignment: &[usize], flags: &[bool], k: usize) -> f64 {
    let mut total = 0usize;
    for c in 0..k {
        let members: Vec<bool> = (0..assignment.len())
            .filter(|&i| assignment[i] == c)
            .map(|i| flags[i])
            .collect();
        let drifted = members.iter().filter(|&&f| f).count();
        total += drifted.max(members.len() - drifted);
    }
    total as f64 / assignment.len() as f64
}

fn criterion_3() -> Outcome {
    let mut cases = 0usize;
    for n in 1..=8usize {
        for k in 1..=3usize {
            let n_assign = k.pow(n as u32);
            for code in 0..n_assign {
                let mut assignment = vec![0; n];
                let mut c = code;
                for a in assignment.iter_mut() {
                    *a = c % k;
                    c /= k;
                }
                for mask in 0..(1u32 << n) {
                    let flags: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                    let got = purity(&assignment, &flags).map_err(e2s)?;
                    let want = purity_oracle(&assignment, &flags, k);
                    if got != want {
                        return Err(format!("{assignment:?} {flags:?}: {got} != {want}"));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} (assignment, flags) cases match"))
}

const D: usize = 256;

fn synth_offline(seed: u64) -> OfflineConfig {
    OfflineConfig {
        d_prime: 32,
        d_prime_label: 16,
        n_th: 10_000,
        t_alpha: 0.01,
        window_size: 1000,
        seed,
        labels: None,
    }
}

fn synth_source() -> SynthSource {
    SynthSource::new(SynthConfig {
        n_labels: 3,
        dim: D,
        drift_shift: 8.0,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn criterion_4() -> Outcome {
    let source = synth_source();
    let data = synth_run_data(&source, SynthSplit::default(), 4004).map_err(e2s)?;
    let cfg = synth_offline(44);
    let baseline = fit_baseline(&data.historical, &cfg).map_err(e2s)?;
    let samples = sample_threshold_distances(&baseline, &data.threshold, DistanceKind::Fdd, &cfg)
        .map_err(e2s)?;
    let alphas = [0.0, 0.01, 0.05, 0.1, 0.25];
    let ts: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            thresholds_from_samples(&baseline, &samples, DistanceKind::Fdd, &OfflineConfig { t_alpha: a, ..cfg.clone() })
                .t_batch
        })
        .collect();
    for w in ts.windows(2) {
        check(w[1] <= w[0], format!("threshold not monotone in t_alpha: {ts:?}"))?;
    }
    let t01 = thresholds_from_samples(&baseline, &samples, DistanceKind::Fdd, &cfg);
    let t0 = thresholds_from_samples(&baseline, &samples, DistanceKind::Fdd, &OfflineConfig { t_alpha: 0.0, ..cfg.clone() });

    let schedule = embdrift::eval::DriftSchedule::constant(0.0, 1000).map_err(e2s)?;
    let stream = embdrift::eval::build_stream(&data.stream, &schedule, 1000, 4005).map_err(e2s)?;
    let log01 = run_stream(&baseline, &t01, &stream.windows).map_err(e2s)?;
    let fp01 = log01.batch_flags().iter().filter(|&&f| f).count() as f64 / 1000.0;
    let fp0 = log01
        .batch_curve()
        .iter()
        .filter(|&&d| d > t0.t_batch)
        .count() as f64
        / 1000.0;
    check(fp01 <= 0.03, format!("false-alarm rate {fp01} > 0.03 at t_alpha=0.01"))?;
    check(fp0 <= 0.005, format!("false-alarm rate {fp0} > 0.005 at t_alpha=0"))?;
    Ok(format!(
        "FP rate {fp01:.3} (t_alpha=0.01), {fp0:.3} (t_alpha=0); T over {alphas:?} = {:?}",
        ts.iter().map(|t| format!("{t:.3}")).collect::<Vec<_>>()
    ))
}

fn sweep(metric: DistanceKind) -> Result<embdrift::eval::SweepReport, String> {
    let source = synth_source();
    let config = SweepConfig {
        severities: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        windows_per_level: 100,
        repetitions: 5,
        metric,
        offline: synth_offline(0),
        seed: 5005,
    };
    severity_sweep(&config, |seed| synth_run_data(&source, SynthSplit::default(), seed)).map_err(e2s)
}

fn describe(r: &DetectionReport) -> String {
    let accs: Vec<String> = r
        .levels
        .iter()
        .map(|l| format!("{}%:{:.3}", l.drift_pct, l.accuracy))
        .collect();
    format!("acc [{}], H_DD {:.3}", accs.join(" "), r.h_dd)
}

fn criterion_5() -> Outcome {
    let report = sweep(DistanceKind::Fdd)?;
    let p = &report.pooled;
    for level in [10.0, 15.0, 20.0] {
        let a = p.accuracy_at(level).unwrap();
        check(a >= 0.95, format!("accuracy {a:.3} < 0.95 at {level}%; {}", describe(p)))?;
    }
    check(p.a_nodrift >= 0.95, format!("A_0 {:.3} < 0.95; {}", p.a_nodrift, describe(p)))?;
    check(p.h_dd >= 0.90, format!("H_DD {:.3} < 0.90; {}", p.h_dd, describe(p)))?;
    Ok(format!("5 runs × 100 windows/level: {}", describe(p)))
}

fn criterion_6() -> Outcome {
    let source = synth_source();
    let data = synth_run_data(&source, SynthSplit::default(), 6006).map_err(e2s)?;
    let cfg = synth_offline(66);
    let baseline = fit_baseline(&data.historical, &cfg).map_err(e2s)?;
    let t = estimate_thresholds(&baseline, &data.threshold, DistanceKind::Fdd, &cfg).map_err(e2s)?;
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for (i, p) in [Pattern::sudden(), Pattern::incremental(), Pattern::periodic()]
        .iter()
        .enumerate()
    {
        let (run, _) =
            pattern_correlation(&baseline, &t, &data.stream, p, 1000, 600 + i as u64).map_err(e2s)?;
        parts.push(format!("{} {:.3}", p.name(), run.spearman));
        if run.spearman < 0.80 {
            failures.push(format!("{} {:.3} < 0.80", p.name(), run.spearman));
        }
    }
    if failures.is_empty() {
        Ok(format!("Spearman: {}", parts.join(", ")))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_7() -> Outcome {
    let (m_w, d) = (10_000usize, 1000usize);
    let source = SynthSource::new(SynthConfig {
        n_labels: 3,
        dim: d,
        ..SynthConfig::default()
    })
    .unwrap();
    let cfg = OfflineConfig {
        d_prime: 150,
        d_prime_label: 75,
        window_size: m_w,
        ..OfflineConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let small = fit_baseline(&source.sample_nondrift(334, &mut rng), &cfg).map_err(e2s)?;
    let large = fit_baseline(&source.sample_nondrift(33_334, &mut rng), &cfg).map_err(e2s)?;
    let window = source.sample_nondrift(3334, &mut rng);
    let window = window.select(&(0..m_w).collect::<Vec<_>>());
    let ts = open_thresholds(&small, m_w, DistanceKind::Fdd);
    let tl = open_thresholds(&large, m_w, DistanceKind::Fdd);
    let ds = Detector::new(&small, &ts).map_err(e2s)?;
    let dl = Detector::new(&large, &tl).map_err(e2s)?;
    // interleave so drift in machine load hits both equally
    let (mut s_small, mut s_large) = (Vec::new(), Vec::new());
    time_analyze(&ds, &window, 1).map_err(e2s)?;
    time_analyze(&dl, &window, 1).map_err(e2s)?;
    for r in 0..10 {
        if r % 2 == 0 {
            s_small.extend(time_analyze(&ds, &window, 1).map_err(e2s)?);
            s_large.extend(time_analyze(&dl, &window, 1).map_err(e2s)?);
        } else {
            s_large.extend(time_analyze(&dl, &window, 1).map_err(e2s)?);
            s_small.extend(time_analyze(&ds, &window, 1).map_err(e2s)?);
        }
    }
    let (mean_s, _, med_s) = summarize(&s_small);
    let (mean_l, std_l, med_l) = summarize(&s_large);
    let mean = (mean_s + mean_l) / 2.0;
    let rel = (med_s - med_l).abs() / med_s.min(med_l);
    check(mean <= 0.2, format!("mean analyze time {mean:.3}s > 0.2s"))?;
    check(rel < 0.10, format!("m_b=10³ vs 10⁵ median times {med_s:.4}s vs {med_l:.4}s differ by {:.1}%", rel * 100.0))?;
    Ok(format!(
        "m_w=10⁴, d=10³, d'=150: mean {mean:.3}s (m_b=10⁵: {mean_l:.3}±{std_l:.3}s); median m_b=10³ {med_s:.4}s vs 10⁵ {med_l:.4}s ({:.1}% apart)",
        rel * 100.0
    ))
}

fn scope_check(report: &ExplanationReport, rows: &[usize], drifted: &[bool]) -> Result<f64, String> {
    let local: Vec<bool> = rows.iter().map(|&r| drifted[r]).collect();
    let c = &report.clustering;
    let p = purity(&c.assignment, &local).map_err(e2s)?;
    for cl in 0..c.k {
        let members: Vec<usize> = (0..rows.len()).filter(|&i| c.assignment[i] == cl).collect();
        let n_drift = members.iter().filter(|&&i| local[i]).count();
        if 2 * n_drift > members.len() {
            let has = report.prototypes[cl].iter().any(|p| drifted[p.index]);
            check(has, format!("{:?} cluster {cl} is drift-majority but has no drifted prototype", report.scope))?;
        }
    }
    Ok(p)
}

fn criterion_8() -> Outcome {
    let source = synth_source();
    let pools = source.pools(2000, 8008).map_err(e2s)?;
    let schedule = embdrift::eval::DriftSchedule::constant(20.0, 1).map_err(e2s)?;
    let s = embdrift::eval::build_stream(&pools, &schedule, 1000, 808).map_err(e2s)?;
    let window = &s.windows[0];
    let drifted = &s.drifted_rows[0];
    let host = source.config().drift_host;
    let e = explain_window(window, &ExplainConfig { k_max: 10, top_n: 5, seed: 8, per_label: true })
        .map_err(e2s)?;
    let host_rows = window.rows_with_label(host);
    let host_report = e.label(host).ok_or("host label not explained")?;
    let p_label = scope_check(host_report, &host_rows, drifted)?;
    let all: Vec<usize> = (0..window.len()).collect();
    let p_batch = scope_check(&e.batch, &all, drifted)?;
    check(p_label >= 0.90, format!("host-label purity {p_label:.3} < 0.90"))?;
    check(p_batch >= 0.90, format!("batch purity {p_batch:.3} < 0.90"))?;
    Ok(format!(
        "host label: k={} purity {p_label:.3}; batch: k={} purity {p_batch:.3}",
        host_report.clustering.k, e.batch.clustering.k
    ))
}

fn files_equal(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .map_err(e2s)?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut count = 0;
    for n in names {
        let (pa, pb) = (a.join(&n), b.join(&n));
        if pa.is_dir() {
            count += files_equal(&pa, &pb)?;
            continue;
        }
        let (x, y) = (std::fs::read(&pa).map_err(e2s)?, std::fs::read(&pb).map_err(e2s)?);
        check(x == y, format!("{} differs between runs", n.to_string_lossy()))?;
        count += 1;
    }
    Ok(count)
}

/// Runs the full CLI flow inside `root`, using relative paths so that
/// recorded input names do not depend on where the run happened.
fn pipeline(root: &Path) -> Result<(), String> {
    let prev = std::env::current_dir().map_err(e2s)?;
    std::env::set_current_dir(root).map_err(e2s)?;
    let result = pipeline_steps();
    std::env::set_current_dir(prev).map_err(e2s)?;
    result
}

fn pipeline_steps() -> Result<(), String> {
    let p = |s: &str| s.to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["simulate", "--pattern", "sudden", "--total", "12", "--onset", "6", "--dim", "24",
             "--rows-per-label", "400", "--window-size", "200", "--seed", "9",
             "--start-time", "2024-01-01T00:00:00Z", "--training-out", &p("train"), "--out", &p("stream")]
            .into_iter().map(String::from).collect(),
        vec!["fit-baseline", "--embeddings", &p("train/historical.dlem"), "--d-prime", "6",
             "--d-prime-label", "4", "--seed", "3", "--timestamp", "2024-01-01T00:00:00Z", "--out", &p("model.dlmb")]
            .into_iter().map(String::from).collect(),
        vec!["estimate-threshold", "--model", &p("model.dlmb"), "--embeddings", &p("train/threshold.dlem"),
             "--window-size", "200", "--n-th", "300", "--seed", "4", "--timestamp", "2024-01-01T00:00:00Z",
             "--out", &p("bundle.dlmb")]
            .into_iter().map(String::from).collect(),
        vec!["monitor", "--bundle", &p("bundle.dlmb"), "--stream", &p("stream"), "--out", &p("monitor")]
            .into_iter().map(String::from).collect(),
        vec!["explain", "--bundle", &p("bundle.dlmb"), "--window", &p("stream/window_00010.dlem"),
             "--manifest", &p("stream/manifest.json"), "--k-max", "5", "--out", &p("explain.json")]
            .into_iter().map(String::from).collect(),
        vec!["evaluate", "--bundle", &p("bundle.dlmb"), "--stream", &p("stream"), "--out", &p("eval")]
            .into_iter().map(String::from).collect(),
    ];
    for args in steps {
        let code = embdrift::cli::run(std::iter::once("embdrift".to_string()).chain(args.clone()));
        check(code == 0, format!("`{}` exited {code}", args.join(" ")))?;
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let source = SynthSource::new(SynthConfig { dim: 40, ..SynthConfig::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let cfg = OfflineConfig {
        d_prime: 10,
        d_prime_label: 6,
        n_th: 200,
        window_size: 100,
        ..OfflineConfig::default()
    };
    let baseline = fit_baseline(&source.sample_nondrift(300, &mut rng), &cfg).map_err(e2s)?;
    let t = estimate_thresholds(&baseline, &source.sample_nondrift(300, &mut rng), DistanceKind::Fdd, &cfg)
        .map_err(e2s)?;
    let bundle = ModelBundle::new(baseline, Some(t), Some("2024-01-01T00:00:00Z".into()));
    let dir = tempfile::tempdir().map_err(e2s)?;
    let path = dir.path().join("m.dlmb");
    save_bundle(&path, &bundle).map_err(e2s)?;
    let loaded = load_bundle(&path).map_err(e2s)?;
    check(loaded.warnings.is_empty(), "integrity warning on clean bundle")?;
    check(loaded.bundle == bundle, "bundle changed on round trip")?;
    let bits = |b: &ModelBundle| -> Vec<u64> {
        let mut v: Vec<u64> = b.baseline.batch_gaussian().covariance().iter().map(|x| x.to_bits()).collect();
        for l in b.baseline.label_models() {
            v.extend(l.gaussian.covariance().iter().map(|x| x.to_bits()));
            v.extend(l.pca.components().iter().map(|x| x.to_bits()));
        }
        v.extend(b.thresholds.as_ref().unwrap().t_label.values().map(|x| x.to_bits()));
        v
    };
    check(bits(&loaded.bundle) == bits(&bundle), "bit pattern changed")?;
    check(loaded.bundle.encode().map_err(e2s)? == std::fs::read(&path).map_err(e2s)?, "re-encoding differs")?;

    let (r1, r2) = (tempfile::tempdir().map_err(e2s)?, tempfile::tempdir().map_err(e2s)?);
    pipeline(r1.path())?;
    pipeline(r2.path())?;
    let n = files_equal(r1.path(), r2.path())?;
    Ok(format!("bundle round-trips bit-exactly; two CLI pipeline runs produced {n} identical files"))
}

fn closed_forms_1d() -> Result<(), String> {
    let kl = |ma: f64, sa: f64, mb: f64, sb: f64| {
        (sb / sa).ln() + (sa * sa + (ma - mb) * (ma - mb)) / (2.0 * sb * sb) - 0.5
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..50 {
        let (ma, mb) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (sa, sb) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
        let (a, b) = (g1(ma, sa), g1(mb, sb));
        let va = sa * sa;
        let vb = sb * sb;
        let mm = (ma + mb) / 2.0;
        let vm = (va + vb) / 2.0 + (ma - mb) * (ma - mb) / 4.0;
        let sm = vm.sqrt();
        let want = [
            (DistanceKind::Kl, kl(ma, sa, mb, sb)),
            (DistanceKind::Js, 0.5 * kl(ma, sa, mm, sm) + 0.5 * kl(mb, sb, mm, sm)),
            (DistanceKind::Mahalanobis, (ma - mb).abs() / sb),
            (
                DistanceKind::Bhattacharyya,
                (ma - mb) * (ma - mb) / (4.0 * (va + vb)) + 0.5 * ((va + vb) / (2.0 * sa * sb)).ln(),
            ),
        ];
        for (kind, w) in want {
            let got = alt_distance(kind, &a, &b).map_err(e2s)?;
            // covariance jitter of 1e-6 relative bounds the deviation
            check(
                (got - w).abs() <= 1e-5 * (1.0 + w.abs()),
                format!("{kind} 1-D: got {got}, closed form {w}"),
            )?;
        }
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    for kind in [DistanceKind::Kl, DistanceKind::Js, DistanceKind::Mahalanobis, DistanceKind::Bhattacharyya] {
        for d in [1, 4, 16] {
            let a = random_gaussian(&mut rng, d);
            let b = random_gaussian(&mut rng, d);
            let zero = alt_distance(kind, &a, &a).map_err(e2s)?;
            check(zero.abs() <= 1e-8, format!("{kind}(a,a) = {zero:e}"))?;
            if kind.is_symmetric() {
                let ab = alt_distance(kind, &a, &b).map_err(e2s)?;
                let ba = alt_distance(kind, &b, &a).map_err(e2s)?;
                check((ab - ba).abs() <= 1e-7 * ab.abs().max(1.0), format!("{kind} asymmetric: {ab} vs {ba}"))?;
            }
        }
    }
    closed_forms_1d()?;
    let report = sweep(DistanceKind::Mahalanobis)?;
    let p = &report.pooled;
    check(p.h_dd >= 0.85, format!("Mahalanobis H_DD {:.3} < 0.85; {}", p.h_dd, describe(p)))?;
    Ok(format!("identity/symmetry/1-D forms ok; Mahalanobis sweep {}", describe(p)))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "FDD closed form", limit: Some(Duration::from_secs(1)), run: criterion_1 },
        Criterion { id: 2, name: "H_DD exactness", limit: None, run: criterion_2 },
        Criterion { id: 3, name: "purity oracle", limit: Some(Duration::from_secs(10)), run: criterion_3 },
        Criterion { id: 4, name: "threshold semantics", limit: None, run: criterion_4 },
        Criterion { id: 5, name: "end-to-end synthetic detection", limit: Some(Duration::from_secs(300)), run: criterion_5 },
        Criterion { id: 6, name: "drift-curve correlation", limit: Some(Duration::from_secs(120)), run: criterion_6 },
        Criterion { id: 7, name: "runtime bound", limit: None, run: criterion_7 },
        Criterion { id: 8, name: "explanation isolation", limit: None, run: criterion_8 },
        Criterion { id: 9, name: "persistence and determinism", limit: None, run: criterion_9 },
        Criterion { id: 10, name: "alternative metrics", limit: None, run: criterion_10 },
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for c in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&c.id)) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, c.limit) {
            if elapsed > limit {
                outcome = Err(format!("took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS [{}] {}: {} ({:.1}s)", c.id, c.name, detail, elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {}: {} ({:.1}s)", c.id, c.name, why, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

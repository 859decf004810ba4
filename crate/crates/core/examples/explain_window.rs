//! Explaining a flagged window: cluster its rows, pick prototypes per
//! cluster, and check how well clusters separate drifted rows.

use embdrift::eval::{build_stream, DriftSchedule, SynthConfig, SynthSource};
use embdrift::explain::{explain_window, purity, ExplainConfig, Scope};

fn main() -> embdrift::Result<()> {
    let source = SynthSource::new(SynthConfig { dim: 64, ..SynthConfig::default() })?;
    let pools = source.pools(1000, 8)?;
    let stream = build_stream(&pools, &DriftSchedule::constant(20.0, 1)?, 600, 9)?;
    let (window, drifted) = (&stream.windows[0], &stream.drifted_rows[0]);

    let explanation = explain_window(window, &ExplainConfig { k_max: 6, top_n: 3, seed: 1, per_label: true })?;
    for report in std::iter::once(&explanation.batch).chain(explanation.labels.iter()) {
        let rows: Vec<usize> = match report.scope {
            Scope::Batch => (0..window.len()).collect(),
            Scope::Label(l) => window.rows_with_label(l),
        };
        let flags: Vec<bool> = rows.iter().map(|&r| drifted[r]).collect();
        let c = &report.clustering;
        println!(
            "{:?}: k={} silhouette {:.3} purity {:.3}",
            report.scope,
            c.k,
            c.silhouette,
            purity(&c.assignment, &flags)?
        );
        for (cluster, protos) in report.prototypes.iter().enumerate() {
            let size = c.cluster_sizes()[cluster];
            let ids: Vec<String> = protos
                .iter()
                .map(|p| format!("{}{}", p.index, if drifted[p.index] { "*" } else { "" }))
                .collect();
            println!("  cluster {cluster} ({size} rows) prototypes {}", ids.join(" "));
        }
    }
    for s in &explanation.skipped {
        println!("skipped label {}: {}", s.label, s.reason);
    }
    println!("(* marks rows injected from the drift pool)");
    Ok(())
}

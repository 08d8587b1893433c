//! Fit the three attacker correlation models — conditional (bucketed by
//! property frequency and edge degree), global (pooled), and binomial
//! (two rates) — on a synthetic corpus with planted correlation.
//!
//! Run with: `cargo run --example fit_correlation_models`

use confgraph::correlation::{fit_binomial, fit_conditional, fit_global, FitOptions};
use confgraph::ingest::{generate_synthetic, SyntheticSpec};

fn main() -> confgraph::Result<()> {
    let spec = SyntheticSpec {
        node_count: 400,
        branching: 3,
        list_count: 6,
        list_size: 12,
        vocab_size: 60,
        seed_prob: 0.1,
        propagation: 0.25,
        seed: 42,
    };
    let corpus = generate_synthetic(&spec)?;
    let properties = corpus.labeling.vocabulary().to_vec();
    let opts = FitOptions::default();

    let binomial = fit_binomial(&corpus.graph, &corpus.labeling, &properties, &opts)?;
    println!(
        "binomial: p0 = {:.4} (center unlabeled), p1 = {:.4} (center labeled)",
        binomial.p0, binomial.p1
    );

    let global = fit_global(&corpus.graph, &corpus.labeling, &properties, &opts)?;
    println!(
        "global: absent support {:?}.., present support {:?}..",
        &global.absent.support()[..global.absent.support().len().min(5)],
        &global.present.support()[..global.present.support().len().min(5)]
    );

    let conditional = fit_conditional(&corpus.graph, &corpus.labeling, &properties, &opts)?
        .with_fallback(global.clone());
    println!("conditional: {} (freq, deg) buckets fitted", conditional.cells.len());
    for cell in conditional.cells.iter().take(6) {
        println!(
            "  bucket (log freq {}, log deg {}): absent {}, present {}",
            cell.log_freq,
            cell.log_deg,
            cell.absent.as_ref().map_or("fallback".into(), |d| format!("{} atoms", d.support().len())),
            cell.present.as_ref().map_or("fallback".into(), |d| format!("{} atoms", d.support().len())),
        );
    }
    Ok(())
}

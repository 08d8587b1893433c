//! Calibrate Laplace noise scales λ = c·W/ε for all six privacy modes and
//! show how the sensitivity W grows with the strength of the correlation
//! the mode defends against.
//!
//! Run with: `cargo run --example calibrate_noise`

use confgraph::correlation::{fit_binomial, fit_conditional, fit_global, FitOptions};
use confgraph::ingest::{generate_synthetic, SyntheticSpec};
use confgraph::mechanisms::{calibrate, MechanismConfig, PrivacyMode, SensitivitySource};
use confgraph::transport::{compute_w_binomial, compute_w_conditional, compute_w_global};

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
    let stats = corpus.graph.degree_stats();
    let properties = corpus.labeling.vocabulary().to_vec();
    let opts = FitOptions::default();

    let global = fit_global(&corpus.graph, &corpus.labeling, &properties, &opts)?;
    let reports = [
        compute_w_conditional(
            &fit_conditional(&corpus.graph, &corpus.labeling, &properties, &opts)?
                .with_fallback(global.clone()),
            stats.n_max,
        )?,
        compute_w_global(&global, stats.n_max)?,
        compute_w_binomial(
            &fit_binomial(&corpus.graph, &corpus.labeling, &properties, &opts)?,
            stats.n_max as u64,
            stats.n_max,
        )?,
    ];

    println!("{:<12} {:>12} {:>14}", "mode", "W", "lambda");
    for mode in PrivacyMode::ALL {
        let config = MechanismConfig {
            epsilon: 100.0,
            delta: 0.0,
            cap: 1000,
            mode,
            seed: 0,
        };
        let source = match mode.model_kind() {
            None if mode == PrivacyMode::Group => SensitivitySource::Graph(&stats),
            None => SensitivitySource::Unit,
            Some(kind) => SensitivitySource::Report(
                reports.iter().find(|r| r.kind == kind).unwrap(),
            ),
        };
        let scale = calibrate(&config, &source)?;
        println!("{:<12} {:>12.2} {:>14.2}", mode.to_string(), scale.w, scale.lambda);
    }
    Ok(())
}

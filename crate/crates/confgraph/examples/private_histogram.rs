//! Release a property histogram under Laplace noise calibrated for two
//! different privacy modes and compare yield (tokens whose noisy count stays
//! positive) and error.
//!
//! Run with: `cargo run --example private_histogram`

use confgraph::ingest::{generate_synthetic, SyntheticSpec};
use confgraph::mechanisms::{calibrate, MechanismConfig, PrivacyMode, SensitivitySource};
use confgraph::tasks::{release_histogram, true_histogram};

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
    let counts = true_histogram(&corpus.labeling);
    let total: u64 = counts.values().sum();
    println!("true histogram: {} tokens, {} labeled edges total", counts.len(), total);

    let stats = corpus.graph.degree_stats();
    for mode in [PrivacyMode::Edge, PrivacyMode::Group] {
        let config = MechanismConfig {
            epsilon: 100.0,
            delta: 0.0,
            cap: 1000,
            mode,
            seed: 42,
        };
        let source = if mode == PrivacyMode::Group {
            SensitivitySource::Graph(&stats)
        } else {
            SensitivitySource::Unit
        };
        let scale = calibrate(&config, &source)?;
        let result = release_histogram(&counts, &scale, &format!("hist/{mode}"))?;
        println!(
            "{mode}: lambda {:.1}, yield {}/{} ({:.1}%), rmse {:.1}",
            scale.lambda,
            result.yield_count,
            counts.len(),
            100.0 * result.yield_fraction,
            result.rmse_clipped
        );
    }
    Ok(())
}

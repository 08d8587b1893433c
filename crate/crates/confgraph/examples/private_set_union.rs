//! Differentially private set union over the property vocabulary: a token is
//! published only if its noisy edge count clears a threshold derived from
//! the noise scale and a slack parameter δ.
//!
//! Run with: `cargo run --example private_set_union`

use confgraph::ingest::{generate_synthetic, SyntheticSpec};
use confgraph::mechanisms::{calibrate, MechanismConfig, PrivacyMode, SensitivitySource};
use confgraph::tasks::{default_dpsu_delta, dpsu_release, dpsu_trials, true_histogram};

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
    let delta = default_dpsu_delta(corpus.graph.edge_count());

    let config = MechanismConfig {
        epsilon: 100.0,
        delta: 0.0,
        cap: 1000,
        mode: PrivacyMode::Edge,
        seed: 42,
    };
    let scale = calibrate(&config, &SensitivitySource::Unit)?;

    let result = dpsu_release(&counts, &scale, delta, "dpsu/demo")?;
    println!(
        "threshold {:.2} (delta = {delta:.2e}): released {}/{} tokens",
        result.threshold,
        result.yield_count,
        counts.len()
    );
    for token in result.released.iter().take(8) {
        println!("  {token}");
    }

    let trials = dpsu_trials(&counts, &scale, delta, 20)?;
    println!(
        "over 20 trials: mean yield {:.1} ± {:.1}",
        trials.mean_yield, trials.std_yield
    );
    Ok(())
}

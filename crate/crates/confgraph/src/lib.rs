//! Noise-calibrated release of edge properties from communication graphs.
//!
//! Organizational message traffic induces a graph whose edges carry private
//! properties (discussion topics, extracted n-grams). Neighboring edges are
//! correlated: people talk about what their correspondents talk about. Under
//! correlation, per-record noise addition leaks, so this crate calibrates
//! Laplace noise to the ∞-Wasserstein distance between the attacker's
//! conditional beliefs about aggregate statistics under the two states of a
//! secret, for several attacker correlation models of increasing coarseness.
//!
//! The main pipeline: ingest or synthesize a corpus ([`ingest`]), fit
//! correlation models ([`correlation`]), compute maximal sensitivity
//! ([`transport`]), calibrate noise ([`mechanisms`]), and run the release
//! tasks — noisy histograms and private set union — plus an inference-attack
//! evaluation ([`tasks`]).

pub mod correlation;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod mechanisms;
pub mod pipeline;
pub mod rng;
pub mod tasks;
pub mod transport;

pub use error::{Error, Result};
pub use graph::{build_graph, read_edge_csv, DegreeStats, EdgeId, NodeId, OrgGraph};
pub use ingest::{
    expand_lists, extract_ngrams, generate_synthetic, graph_from_messages, infer_lists,
    label_edges, read_jsonl, Message, PropertyLabeling, SyntheticCorpus, SyntheticSpec,
};
pub use correlation::{
    fit_binomial, fit_conditional, fit_global, BinomialModel, ConditionalModel, CorrelationModel,
    FitOptions, GlobalModel, ModelKind,
};
pub use transport::{
    compute_w_binomial, compute_w_conditional, compute_w_global, w_infinity, w_infinity_oracle,
    DiscreteDistribution, SensitivityReport,
};
pub use mechanisms::{
    calibrate, group_budget, markov_quilt_scale, pufferfish_ratio_check, theta_w_infinity,
    LaplaceSampler, MechanismConfig, NoiseScale, PrivacyMode, RatioCheck, SensitivitySource,
    ToyTheta,
};
pub use tasks::{
    dpsu_release, dpsu_trials, evaluate_attack, release_histogram, true_histogram, AttackReport,
    AttackTarget, DpsuResult, DpsuTrials, HistogramResult,
};

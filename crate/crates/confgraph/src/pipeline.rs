//! Artifact pipeline: ingest → fit → sensitivity → run → attack → report.
//!
//! Each stage writes plain CSV/JSON artifacts into the run directory.
//! Corpus artifacts are content-addressed: `stats.json` records a SHA-256
//! over the edge list and labeling, and every downstream artifact embeds
//! that hash so stale sensitivity reports cannot silently corrupt W.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlation::{
    fit_binomial, fit_conditional, fit_global, CorrelationModel, FitOptions, ModelKind,
};
use crate::error::{Error, Result};
use crate::graph::{read_edge_csv_file, DegreeStats, OrgGraph};
use crate::ingest::{
    expand_lists, generate_synthetic, graph_from_messages, label_edges, read_jsonl_file,
    write_jsonl, Message, PropertyLabeling, SyntheticSpec,
};
use crate::mechanisms::{calibrate, MechanismConfig, NoiseScale, PrivacyMode, SensitivitySource};
use crate::tasks::{
    default_dpsu_delta, dpsu_trials, evaluate_attack, node_histogram, release_histogram,
    true_histogram, AttackOptions, AttackReport, AttackTarget,
};
use crate::transport::{
    compute_w_binomial, compute_w_conditional, compute_w_global, SensitivityReport,
};

/// Declarative run configuration; exactly one corpus source must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Messages JSONL path (real-corpus mode).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub messages: Option<PathBuf>,
    /// Optional explicit mailing-list table JSON (`{list: [members]}`);
    /// lists are inferred from traffic when absent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lists: Option<PathBuf>,
    /// Synthetic corpus spec (generated-corpus mode).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub synth: Option<SyntheticSpec>,
    /// Per-edge property cap c.
    pub cap: usize,
    pub epsilon: f64,
    /// DPSU release slack; defaults to 1/|E|².
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dpsu_delta: Option<f64>,
    pub seed: u64,
    /// Evaluation degree for the binomial W; defaults to N_max.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub binomial_deg: Option<u64>,
    /// Artifact directory.
    pub out: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.messages, &self.synth) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "set either a messages path or a synthetic spec, not both".into(),
            )),
            (None, None) => Err(Error::InvalidConfig(
                "one of messages path or synthetic spec is required".into(),
            )),
            _ => {
                if self.cap < 1 {
                    return Err(Error::InvalidConfig("cap must be at least 1".into()));
                }
                if !(self.epsilon > 0.0) {
                    return Err(Error::InvalidConfig("epsilon must be positive".into()));
                }
                Ok(())
            }
        }
    }

    fn mechanism(&self, mode: PrivacyMode) -> MechanismConfig {
        MechanismConfig {
            epsilon: self.epsilon,
            delta: 0.0,
            cap: self.cap,
            mode,
            seed: self.seed,
        }
    }
}

/// `stats.json`: graph summary plus the corpus content hash every later
/// stage verifies against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsArtifact {
    pub corpus_hash: String,
    pub cap: usize,
    pub seed: u64,
    pub stats: DegreeStats,
}

/// `sensitivity_<kind>.json`: fitted report bound to its corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityArtifact {
    pub corpus_hash: String,
    pub report: SensitivityReport,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_vec_pretty(value)?;
    body.push(b'\n');
    fs::write(path, body)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let body = fs::read(path).map_err(|_| Error::MissingArtifact(path.display().to_string()))?;
    Ok(serde_json::from_slice(&body)?)
}

/// SHA-256 over the corpus artifacts (edge list + labeling), hex encoded.
fn hash_corpus(out: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    for name in ["edges.csv", "labeling.csv"] {
        let path = out.join(name);
        let body =
            fs::read(&path).map_err(|_| Error::MissingArtifact(path.display().to_string()))?;
        hasher.update(&body);
    }
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn write_corpus_artifacts(
    config: &RunConfig,
    graph: &OrgGraph,
    labeling: &PropertyLabeling,
    messages: Option<&[Message]>,
    lists: Option<&BTreeMap<String, Vec<String>>>,
) -> Result<StatsArtifact> {
    fs::create_dir_all(&config.out)?;
    graph.write_edge_csv_file(&config.out.join("edges.csv"))?;
    {
        let f = fs::File::create(config.out.join("labeling.csv"))?;
        labeling.write_csv(graph, std::io::BufWriter::new(f))?;
    }
    if let Some(messages) = messages {
        let f = fs::File::create(config.out.join("messages.jsonl"))?;
        write_jsonl(std::io::BufWriter::new(f), messages)?;
    }
    if let Some(lists) = lists {
        write_json(&config.out.join("lists.json"), lists)?;
    }
    let artifact = StatsArtifact {
        corpus_hash: hash_corpus(&config.out)?,
        cap: config.cap,
        seed: config.seed,
        stats: graph.degree_stats(),
    };
    write_json(&config.out.join("stats.json"), &artifact)?;
    Ok(artifact)
}

/// Ingest a messages JSONL corpus: expand lists, build the graph, label
/// edges with capped n-grams, write the corpus artifacts.
pub fn cmd_ingest(config: &RunConfig) -> Result<StatsArtifact> {
    config.validate()?;
    let path = config
        .messages
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("ingest requires a messages path".into()))?;
    let raw = read_jsonl_file(path)?;
    let table: Option<BTreeMap<String, Vec<String>>> = match &config.lists {
        Some(p) => Some(read_json(p)?),
        None => None,
    };
    let expanded = expand_lists(raw, table.as_ref())?;
    let graph = graph_from_messages(&expanded)?;
    let labeling = label_edges(&graph, &expanded, config.cap);
    write_corpus_artifacts(config, &graph, &labeling, Some(&expanded), table.as_ref())
}

/// Generate the synthetic corpus and write the same artifact set as ingest.
pub fn cmd_synth(config: &RunConfig) -> Result<StatsArtifact> {
    config.validate()?;
    let spec = config
        .synth
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("synth requires a synthetic spec".into()))?;
    let corpus = generate_synthetic(spec)?;
    write_corpus_artifacts(
        config,
        &corpus.graph,
        &corpus.labeling,
        Some(&corpus.messages),
        Some(&corpus.list_table),
    )
}

/// Load corpus artifacts back from the run directory, verifying the hash.
pub fn load_corpus(config: &RunConfig) -> Result<(OrgGraph, PropertyLabeling, StatsArtifact)> {
    let stats: StatsArtifact = read_json(&config.out.join("stats.json"))?;
    let found = hash_corpus(&config.out)?;
    if found != stats.corpus_hash {
        return Err(Error::StaleArtifact {
            path: config.out.join("stats.json").display().to_string(),
            found,
            expected: stats.corpus_hash,
        });
    }
    let graph = read_edge_csv_file(&config.out.join("edges.csv"))?;
    let f = fs::File::open(config.out.join("labeling.csv"))?;
    let labeling = PropertyLabeling::read_csv(&graph, std::io::BufReader::new(f), stats.cap)?;
    Ok((graph, labeling, stats))
}

/// Fit the requested correlation model and write its sensitivity report
/// (`model_<kind>.json`, `sensitivity_<kind>.json`, `sensitivity_<kind>.csv`).
pub fn cmd_sensitivity(config: &RunConfig, kind: ModelKind) -> Result<SensitivityArtifact> {
    let (graph, labeling, stats) = load_corpus(config)?;
    let properties: Vec<String> = labeling.vocabulary().to_vec();
    let opts = FitOptions {
        seed: config.seed,
        ..FitOptions::default()
    };
    let n_max = stats.stats.n_max;
    let (model, report) = match kind {
        ModelKind::Conditional => {
            let fallback = fit_global(&graph, &labeling, &properties, &opts)?;
            let model = fit_conditional(&graph, &labeling, &properties, &opts)?
                .with_fallback(fallback);
            let report = compute_w_conditional(&model, n_max)?;
            (CorrelationModel::Conditional(model), report)
        }
        ModelKind::Global => {
            let model = fit_global(&graph, &labeling, &properties, &opts)?;
            let report = compute_w_global(&model, n_max)?;
            (CorrelationModel::Global(model), report)
        }
        ModelKind::Binomial => {
            let model = fit_binomial(&graph, &labeling, &properties, &opts)?;
            let deg = config.binomial_deg.unwrap_or(n_max as u64);
            let report = compute_w_binomial(&model, deg, n_max)?;
            (CorrelationModel::Binomial(model), report)
        }
    };
    write_json(&config.out.join(format!("model_{kind}.json")), &model)?;
    let artifact = SensitivityArtifact {
        corpus_hash: stats.corpus_hash,
        report,
    };
    write_json(
        &config.out.join(format!("sensitivity_{kind}.json")),
        &artifact,
    )?;
    {
        let f = fs::File::create(config.out.join(format!("sensitivity_{kind}.csv")))?;
        artifact.report.write_csv(std::io::BufWriter::new(f))?;
    }
    Ok(artifact)
}

fn load_report(config: &RunConfig, kind: ModelKind, corpus_hash: &str) -> Result<SensitivityReport> {
    let path = config.out.join(format!("sensitivity_{kind}.json"));
    let artifact: SensitivityArtifact = read_json(&path)?;
    if artifact.corpus_hash != corpus_hash {
        return Err(Error::StaleArtifact {
            path: path.display().to_string(),
            found: artifact.corpus_hash,
            expected: corpus_hash.to_string(),
        });
    }
    Ok(artifact.report)
}

/// Calibrate λ for one mode against the on-disk artifacts.
pub fn calibrated_scale(
    config: &RunConfig,
    stats: &StatsArtifact,
    mode: PrivacyMode,
) -> Result<NoiseScale> {
    let mech = config.mechanism(mode);
    match mode.model_kind() {
        None => match mode {
            PrivacyMode::Group => {
                calibrate(&mech, &SensitivitySource::Graph(&stats.stats))
            }
            _ => calibrate(&mech, &SensitivitySource::Unit),
        },
        Some(kind) => {
            let report = load_report(config, kind, &stats.corpus_hash)?;
            calibrate(&mech, &SensitivitySource::Report(&report))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Hist,
    Dpsu,
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hist" => Ok(Task::Hist),
            "dpsu" => Ok(Task::Dpsu),
            other => Err(Error::InvalidParameter(format!("unknown task {other}"))),
        }
    }
}

/// One comparison-table row; provenance travels in `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub mode: PrivacyMode,
    pub scale: NoiseScale,
    pub mean_yield: f64,
    pub std_yield: f64,
    /// Histogram only: mean yield as a fraction of the vocabulary.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub yield_fraction: Option<f64>,
    /// Histogram only: mean zero-clipped RMSE.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rmse: Option<f64>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Run a release task for several modes and write the comparison table
/// (`run_hist.csv`/`run_dpsu.csv` plus a JSON twin with full provenance).
pub fn cmd_run(
    config: &RunConfig,
    task: Task,
    modes: &[PrivacyMode],
    trials: usize,
) -> Result<Vec<RunRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if modes.is_empty() {
        return Err(Error::InvalidParameter("at least one mode required".into()));
    }
    let (graph, labeling, stats) = load_corpus(config)?;
    let edge_counts = true_histogram(&labeling);
    let node_counts = node_histogram(&graph, &labeling, config.cap);
    let dpsu_delta = config
        .dpsu_delta
        .unwrap_or_else(|| default_dpsu_delta(graph.edge_count()));

    let mut rows = Vec::with_capacity(modes.len());
    for &mode in modes {
        let scale = calibrated_scale(config, &stats, mode)?;
        let counts = if mode == PrivacyMode::Node {
            &node_counts
        } else {
            &edge_counts
        };
        let row = match task {
            Task::Hist => {
                let mut yields = Vec::with_capacity(trials);
                let mut fractions = Vec::with_capacity(trials);
                let mut rmses = Vec::with_capacity(trials);
                for i in 0..trials {
                    let r =
                        release_histogram(counts, &scale, &format!("hist/{mode}/trial/{i}"))?;
                    yields.push(r.yield_count as f64);
                    fractions.push(r.yield_fraction);
                    rmses.push(r.rmse_clipped);
                }
                let (mean, std) = mean_std(&yields);
                RunRow {
                    mode,
                    scale,
                    mean_yield: mean,
                    std_yield: std,
                    yield_fraction: Some(mean_std(&fractions).0),
                    rmse: Some(mean_std(&rmses).0),
                }
            }
            Task::Dpsu => {
                let t = dpsu_trials(counts, &scale, dpsu_delta, trials)?;
                RunRow {
                    mode,
                    scale,
                    mean_yield: t.mean_yield,
                    std_yield: t.std_yield,
                    yield_fraction: None,
                    rmse: None,
                }
            }
        };
        rows.push(row);
    }

    let (csv_name, json_name) = match task {
        Task::Hist => ("run_hist.csv", "run_hist.json"),
        Task::Dpsu => ("run_dpsu.csv", "run_dpsu.json"),
    };
    let mut wtr = csv::Writer::from_writer(fs::File::create(config.out.join(csv_name))?);
    match task {
        Task::Hist => {
            wtr.write_record(["mode", "W", "lambda", "yield", "yield_pct", "rmse"])?;
            for r in &rows {
                wtr.write_record([
                    r.mode.to_string(),
                    r.scale.w.to_string(),
                    r.scale.lambda.to_string(),
                    r.mean_yield.to_string(),
                    format!("{:.2}", 100.0 * r.yield_fraction.unwrap_or(0.0)),
                    format!("{:.2}", r.rmse.unwrap_or(0.0)),
                ])?;
            }
        }
        Task::Dpsu => {
            wtr.write_record(["mode", "W", "mean_yield", "std"])?;
            for r in &rows {
                wtr.write_record([
                    r.mode.to_string(),
                    r.scale.w.to_string(),
                    r.mean_yield.to_string(),
                    format!("{:.2}", r.std_yield),
                ])?;
            }
        }
    }
    wtr.flush()?;
    write_json(&config.out.join(json_name), &rows)?;
    Ok(rows)
}

/// Evaluate the disclosure attack with a previously fitted model and write
/// `attack_<kind>.json`. When `noisy` is set, a second AUC is computed with
/// mechanism-scale noise on the observed counts.
pub fn cmd_attack(
    config: &RunConfig,
    kind: ModelKind,
    targets: Option<&[AttackTarget]>,
    noisy: bool,
) -> Result<AttackReport> {
    let (graph, labeling, stats) = load_corpus(config)?;
    let model: CorrelationModel = read_json(&config.out.join(format!("model_{kind}.json")))?;
    let mode = match kind {
        ModelKind::Conditional => PrivacyMode::Conditional,
        ModelKind::Global => PrivacyMode::Global,
        ModelKind::Binomial => PrivacyMode::Binomial,
    };
    let opts = AttackOptions {
        seed: config.seed,
        noise_lambda: if noisy {
            Some(calibrated_scale(config, &stats, mode)?.lambda)
        } else {
            None
        },
        ..AttackOptions::default()
    };
    let report = evaluate_attack(&graph, &labeling, &model, targets, &opts)?;
    write_json(&config.out.join(format!("attack_{kind}.json")), &report)?;
    Ok(report)
}

/// Human-readable summary of whatever artifacts exist in the run directory.
/// Also written to `report.txt`.
pub fn cmd_report(config: &RunConfig) -> Result<String> {
    let mut out = String::new();
    let stats: StatsArtifact = read_json(&config.out.join("stats.json"))?;
    out.push_str(&format!(
        "corpus {}: {} nodes, {} edges, D_max {}, N_max {}, cap {}\n",
        &stats.corpus_hash[..12],
        stats.stats.node_count,
        stats.stats.edge_count,
        stats.stats.d_max,
        stats.stats.n_max,
        stats.cap,
    ));
    for kind in [ModelKind::Conditional, ModelKind::Global, ModelKind::Binomial] {
        let path = config.out.join(format!("sensitivity_{kind}.json"));
        if let Ok(artifact) = read_json::<SensitivityArtifact>(&path) {
            out.push_str(&format!(
                "sensitivity {kind}: W = {:.2} over {} entr{}\n",
                artifact.report.w,
                artifact.report.entries.len(),
                if artifact.report.entries.len() == 1 { "y" } else { "ies" },
            ));
        }
    }
    for (name, task) in [("run_hist.json", "hist"), ("run_dpsu.json", "dpsu")] {
        if let Ok(rows) = read_json::<Vec<RunRow>>(&config.out.join(name)) {
            out.push_str(&format!("{task}:\n"));
            for r in &rows {
                out.push_str(&format!(
                    "  {:<12} W {:>10.2}  lambda {:>12.2}  yield {:>12.1} ± {:.1}\n",
                    r.mode.to_string(),
                    r.scale.w,
                    r.scale.lambda,
                    r.mean_yield,
                    r.std_yield,
                ));
            }
        }
    }
    for kind in [ModelKind::Conditional, ModelKind::Global, ModelKind::Binomial] {
        let path = config.out.join(format!("attack_{kind}.json"));
        if let Ok(report) = read_json::<AttackReport>(&path) {
            out.push_str(&format!(
                "attack {kind}: AUC {:.3}{} over {} present / {} absent\n",
                report.auc,
                report
                    .auc_noisy
                    .map(|a| format!(" (noisy {a:.3})"))
                    .unwrap_or_default(),
                report.n_present,
                report.n_absent,
            ));
        }
    }
    fs::write(config.out.join("report.txt"), &out)?;
    Ok(out)
}

//! Pipeline driver: ingest → sensitivity → run → attack → report.
//!
//! Thin argument-parsing shell; all behavior lives in the library
//! (`confgraph::pipeline`). See the crate examples for API usage.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use confgraph::correlation::ModelKind;
use confgraph::ingest::SyntheticSpec;
use confgraph::mechanisms::PrivacyMode;
use confgraph::pipeline::{
    cmd_attack, cmd_ingest, cmd_report, cmd_run, cmd_sensitivity, cmd_synth, RunConfig, Task,
};
use confgraph::tasks::AttackTarget;

#[derive(Parser)]
#[command(name = "confgraph", version, about = "Noise-calibrated release of edge properties from communication graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Privacy budget ε.
    #[arg(long, default_value_t = 100.0)]
    epsilon: f64,
    /// Per-edge property cap c.
    #[arg(long, default_value_t = 1000)]
    cap: usize,
    /// Run seed; all noise and sampling streams derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation degree for the binomial sensitivity (default: N_max).
    #[arg(long)]
    binomial_deg: Option<u64>,
    /// Artifact directory.
    #[arg(long)]
    out: PathBuf,
}

impl Common {
    fn config(&self, messages: Option<PathBuf>, lists: Option<PathBuf>, synth: Option<SyntheticSpec>) -> RunConfig {
        RunConfig {
            messages,
            lists,
            synth,
            cap: self.cap,
            epsilon: self.epsilon,
            dpsu_delta: None,
            seed: self.seed,
            binomial_deg: self.binomial_deg,
            out: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build graph + labeling artifacts from a messages JSONL corpus.
    Ingest {
        /// Messages JSONL (objects with id, sender, recipients, body).
        #[arg(long)]
        messages: PathBuf,
        /// Mailing-list table JSON; inferred from traffic when omitted.
        #[arg(long)]
        lists: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic corpus from a spec JSON.
    Synth {
        /// SyntheticSpec JSON file.
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a correlation model and write its sensitivity report.
    Sensitivity {
        /// Model kind: conditional | global | binomial.
        #[arg(long)]
        mode: ModelKind,
        #[command(flatten)]
        common: Common,
    },
    /// Run a release task across privacy modes.
    Run {
        /// Task: hist | dpsu.
        #[arg(long)]
        task: Task,
        /// Comma-separated modes: edge,node,group,conditional,global,binomial.
        #[arg(long, value_delimiter = ',', required = true)]
        mode: Vec<PrivacyMode>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the attribute-disclosure attack with a fitted model.
    Attack {
        /// Model kind: conditional | global | binomial.
        #[arg(long)]
        mode: ModelKind,
        /// Explicit targets CSV (node_a,node_b,token); sampled when omitted.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Also score against mechanism-noise-perturbed observations.
        #[arg(long)]
        noisy: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize all artifacts in the run directory.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn read_targets(path: &PathBuf) -> confgraph::Result<Vec<AttackTarget>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 3 {
            return Err(confgraph::Error::InvalidConfig(
                "targets rows need node_a,node_b,token".into(),
            ));
        }
        out.push(AttackTarget {
            node_a: rec[0].to_string(),
            node_b: rec[1].to_string(),
            property: rec[2].to_string(),
        });
    }
    Ok(out)
}

fn run(cli: Cli) -> confgraph::Result<()> {
    match cli.cmd {
        Cmd::Ingest { messages, lists, common } => {
            let stats = cmd_ingest(&common.config(Some(messages), lists, None))?;
            println!(
                "ingested {} nodes, {} edges (corpus {})",
                stats.stats.node_count,
                stats.stats.edge_count,
                &stats.corpus_hash[..12]
            );
        }
        Cmd::Synth { spec, common } => {
            let spec: SyntheticSpec = serde_json::from_slice(&std::fs::read(spec)?)?;
            let stats = cmd_synth(&common.config(None, None, Some(spec)))?;
            println!(
                "generated {} nodes, {} edges (corpus {})",
                stats.stats.node_count,
                stats.stats.edge_count,
                &stats.corpus_hash[..12]
            );
        }
        Cmd::Sensitivity { mode, common } => {
            let artifact = cmd_sensitivity(&common.config(None, None, None), mode)?;
            println!("{mode}: W = {:.4}", artifact.report.w);
        }
        Cmd::Run { task, mode, trials, common } => {
            let rows = cmd_run(&common.config(None, None, None), task, &mode, trials)?;
            for r in &rows {
                println!(
                    "{:<12} W {:>10.2}  lambda {:>12.2}  yield {:>12.1} ± {:.1}",
                    r.mode.to_string(),
                    r.scale.w,
                    r.scale.lambda,
                    r.mean_yield,
                    r.std_yield
                );
            }
        }
        Cmd::Attack { mode, targets, noisy, common } => {
            let targets = targets.as_ref().map(read_targets).transpose()?;
            let report = cmd_attack(&common.config(None, None, None), mode, targets.as_deref(), noisy)?;
            println!(
                "attack {mode}: AUC {:.4}{} ({} present / {} absent)",
                report.auc,
                report
                    .auc_noisy
                    .map(|a| format!(", noisy AUC {a:.4}"))
                    .unwrap_or_default(),
                report.n_present,
                report.n_absent
            );
        }
        Cmd::Report { common } => {
            print!("{}", cmd_report(&common.config(None, None, None))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! End-to-end private queries and their evaluation.
//!
//! Two release tasks over the capped edge labeling: a noisy token histogram
//! (vocabulary assumed public) and private set union (vocabulary private,
//! thresholded release). Plus an attribute-disclosure attack evaluator that
//! measures how well each correlation model infers edge properties from
//! neighborhood counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationModel;
use crate::error::{Error, Result};
use crate::graph::{NodeId, OrgGraph};
use crate::ingest::PropertyLabeling;
use crate::mechanisms::{laplace_sample, LaplaceSampler, NoiseScale};
use crate::rng::stream;

/// Token -> number of edges labeled with it, zero-filled over the whole
/// vocabulary.
pub fn true_histogram(labeling: &PropertyLabeling) -> BTreeMap<String, u64> {
    let freq = labeling.edge_frequencies();
    labeling
        .vocabulary()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), freq[i] as u64))
        .collect()
}

/// Node-granularity counting baseline: a token counts once per node with an
/// incident labeled edge, at most `cap` tokens per node (kept in vocabulary
/// order).
pub fn node_histogram(
    graph: &OrgGraph,
    labeling: &PropertyLabeling,
    cap: usize,
) -> BTreeMap<String, u64> {
    let mut hist: BTreeMap<String, u64> = labeling
        .vocabulary()
        .iter()
        .map(|t| (t.clone(), 0))
        .collect();
    for n in 0..graph.node_count() {
        let mut tokens: Vec<u32> = graph
            .incident_edges(NodeId(n as u32))
            .flat_map(|e| labeling.tokens_of(e).iter().copied())
            .collect();
        tokens.sort_unstable();
        tokens.dedup();
        tokens.truncate(cap);
        for t in tokens {
            *hist.get_mut(labeling.token(t)).unwrap() += 1;
        }
    }
    hist
}

/// Noisy histogram with utility metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    pub scale: NoiseScale,
    /// Noisy counts; negatives are retained in the release.
    pub noisy: BTreeMap<String, f64>,
    /// Tokens with noisy count > 0.
    pub yield_count: usize,
    pub yield_fraction: f64,
    /// RMSE of noisy vs true counts.
    pub rmse_raw: f64,
    /// RMSE after clipping noisy counts at zero.
    pub rmse_clipped: f64,
}

/// Add independent Laplace(λ) noise to every count. `label` names the noise
/// stream under the scale's seed.
pub fn release_histogram(
    counts: &BTreeMap<String, u64>,
    scale: &NoiseScale,
    label: &str,
) -> Result<HistogramResult> {
    if counts.is_empty() {
        return Err(Error::InvalidParameter("empty histogram".into()));
    }
    let mut sampler = LaplaceSampler::for_scale(scale, label)?;
    let mut noisy = BTreeMap::new();
    let mut yield_count = 0usize;
    let mut sq_raw = 0.0f64;
    let mut sq_clipped = 0.0f64;
    for (token, &count) in counts {
        let value = count as f64 + sampler.sample();
        if value > 0.0 {
            yield_count += 1;
        }
        sq_raw += (value - count as f64).powi(2);
        sq_clipped += (value.max(0.0) - count as f64).powi(2);
        noisy.insert(token.clone(), value);
    }
    let n = counts.len() as f64;
    Ok(HistogramResult {
        scale: scale.clone(),
        noisy,
        yield_count,
        yield_fraction: yield_count as f64 / n,
        rmse_raw: (sq_raw / n).sqrt(),
        rmse_clipped: (sq_clipped / n).sqrt(),
    })
}

/// Default DPSU slack: 1/|E|².
pub fn default_dpsu_delta(edge_count: usize) -> f64 {
    1.0 / (edge_count as f64).powi(2).max(4.0)
}

/// One private-set-union release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpsuResult {
    pub scale: NoiseScale,
    pub delta: f64,
    /// Release threshold Γ = 1 + λ·ln(1/(2δ)).
    pub threshold: f64,
    pub released: Vec<String>,
    pub yield_count: usize,
}

/// Thresholded-Laplace set union: release token a iff
/// weight(a) + Laplace(λ) > Γ. Only tokens with positive weight (present in
/// the union at all) are candidates; an empty labeling releases nothing.
pub fn dpsu_release(
    counts: &BTreeMap<String, u64>,
    scale: &NoiseScale,
    delta: f64,
    label: &str,
) -> Result<DpsuResult> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "dpsu delta must be in (0, 0.5), got {delta}"
        )));
    }
    let mut sampler = LaplaceSampler::for_scale(scale, label)?;
    let threshold = 1.0 + scale.lambda * (1.0 / (2.0 * delta)).ln();
    let mut released = Vec::new();
    for (token, &count) in counts {
        if count == 0 {
            continue;
        }
        // every candidate consumes a draw so the released set for one seed
        // does not depend on the threshold
        let value = count as f64 + sampler.sample();
        if value > threshold {
            released.push(token.clone());
        }
    }
    Ok(DpsuResult {
        scale: scale.clone(),
        delta,
        threshold,
        yield_count: released.len(),
        released,
    })
}

/// Yield statistics over repeated DPSU trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpsuTrials {
    pub scale: NoiseScale,
    pub delta: f64,
    pub threshold: f64,
    pub yields: Vec<usize>,
    pub mean_yield: f64,
    pub std_yield: f64,
}

/// Run `trials` independent DPSU releases (noise streams `dpsu/trial/{i}`)
/// and summarize the yields.
pub fn dpsu_trials(
    counts: &BTreeMap<String, u64>,
    scale: &NoiseScale,
    delta: f64,
    trials: usize,
) -> Result<DpsuTrials> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let mut yields = Vec::with_capacity(trials);
    let mut threshold = 0.0;
    for i in 0..trials {
        let result = dpsu_release(counts, scale, delta, &format!("dpsu/trial/{i}"))?;
        threshold = result.threshold;
        yields.push(result.yield_count);
    }
    let n = trials as f64;
    let mean = yields.iter().sum::<usize>() as f64 / n;
    let var = yields
        .iter()
        .map(|&y| (y as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(DpsuTrials {
        scale: scale.clone(),
        delta,
        threshold,
        yields,
        mean_yield: mean,
        std_yield: var.sqrt(),
    })
}

/// One targeted (edge, property) secret for the disclosure attack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackTarget {
    pub node_a: String,
    pub node_b: String,
    pub property: String,
}

/// A scored target with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTarget {
    pub node_a: String,
    pub node_b: String,
    pub property: String,
    pub posterior: f64,
    pub actual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub n_present: usize,
    pub n_absent: usize,
    /// AUC of the posterior against ground truth, exact observations.
    pub auc: f64,
    /// AUC when the observed neighborhood counts carry mechanism noise.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub auc_noisy: Option<f64>,
    /// Per-target detail; populated only for explicitly listed targets.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub targets: Vec<ScoredTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    /// Sampled targets when no explicit list is given.
    pub max_targets: usize,
    pub seed: u64,
    /// Laplace scale applied to the observed neighborhood counts, modelling
    /// an attacker reading mechanism output instead of the raw graph.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub noise_lambda: Option<f64>,
}

impl Default for AttackOptions {
    fn default() -> Self {
        Self {
            max_targets: 2000,
            seed: 0,
            noise_lambda: None,
        }
    }
}

/// Posterior Pr(property present | neighborhood count w) under the model,
/// with prior Pr(present) = freq(property)/|E|.
fn posterior(model: &CorrelationModel, w: usize, deg: usize, freq: usize, edges: usize) -> f64 {
    let prior = freq as f64 / edges as f64;
    let (l0, l1) = model.state_likelihoods(w, deg, freq);
    let joint1 = prior * l1;
    let joint0 = (1.0 - prior) * l0;
    if joint0 + joint1 <= 0.0 {
        // model puts no mass on the observation either way: fall back to the
        // prior
        prior
    } else {
        joint1 / (joint0 + joint1)
    }
}

/// Rank-statistic AUC; ties contribute 1/2.
fn auc(scores: &[(f64, bool)]) -> Result<f64> {
    let positives = scores.iter().filter(|(_, a)| *a).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidParameter(
            "AUC requires both present and absent targets".into(),
        ));
    }
    let mut wins = 0.0f64;
    for &(sp, ap) in scores.iter().filter(|(_, a)| *a) {
        for &(sn, _) in scores.iter().filter(|(_, a)| !*a) {
            debug_assert!(ap);
            wins += if sp > sn {
                1.0
            } else if sp == sn {
                0.5
            } else {
                0.0
            };
        }
    }
    Ok(wins / (positives as f64 * negatives as f64))
}

/// Evaluate the attribute-disclosure attack with a fitted model.
///
/// Targets default to a uniform sample of (edge, property) pairs. The report
/// carries the AUC on exact neighborhood counts and, when `noise_lambda` is
/// set, on Laplace-perturbed counts rounded and clamped to `[0, deg]`.
pub fn evaluate_attack(
    graph: &OrgGraph,
    labeling: &PropertyLabeling,
    model: &CorrelationModel,
    targets: Option<&[AttackTarget]>,
    opts: &AttackOptions,
) -> Result<AttackReport> {
    let freq = labeling.edge_frequencies();
    let edges = graph.edge_count();

    // (edge, token, explicit name triple when listed)
    let mut picked: Vec<(crate::graph::EdgeId, u32, Option<&AttackTarget>)> = Vec::new();
    match targets {
        Some(list) => {
            if list.is_empty() {
                return Err(Error::InvalidParameter("empty target list".into()));
            }
            for t in list {
                let e = graph.require_edge(&t.node_a, &t.node_b)?;
                let token = labeling.token_id(&t.property).ok_or_else(|| {
                    Error::InvalidParameter(format!("unknown property token {}", t.property))
                })?;
                picked.push((e, token, Some(t)));
            }
        }
        None => {
            if opts.max_targets == 0 {
                return Err(Error::InvalidParameter("max_targets must be positive".into()));
            }
            let vocab = labeling.vocabulary().len();
            let total = vocab * edges;
            let mut rng = stream(opts.seed, "attack/targets");
            let mut idx: Vec<usize> = if total <= opts.max_targets {
                (0..total).collect()
            } else {
                let mut v: Vec<usize> =
                    rand::seq::index::sample(&mut rng, total, opts.max_targets)
                        .into_iter()
                        .collect();
                v.sort_unstable();
                v
            };
            for i in idx.drain(..) {
                picked.push((
                    crate::graph::EdgeId((i % edges) as u32),
                    (i / edges) as u32,
                    None,
                ));
            }
        }
    }

    let mut noise_rng = stream(opts.seed, "attack/noise");
    let mut scores: Vec<(f64, bool)> = Vec::with_capacity(picked.len());
    let mut noisy_scores: Vec<(f64, bool)> = Vec::with_capacity(picked.len());
    let mut detail = Vec::new();
    for (e, token, explicit) in picked {
        let deg = graph.edge_degree(e);
        let w = crate::correlation::neighborhood_count(graph, labeling, e, token);
        let f = freq[token as usize] as usize;
        let actual = labeling.has(e, token);
        let p = posterior(model, w, deg, f, edges);
        scores.push((p, actual));
        if let Some(lambda) = opts.noise_lambda {
            let perturbed = (w as f64 + laplace_sample(lambda, &mut noise_rng))
                .round()
                .clamp(0.0, deg as f64) as usize;
            noisy_scores.push((posterior(model, perturbed, deg, f, edges), actual));
        }
        if let Some(t) = explicit {
            detail.push(ScoredTarget {
                node_a: t.node_a.clone(),
                node_b: t.node_b.clone(),
                property: t.property.clone(),
                posterior: p,
                actual,
            });
        }
    }

    let n_present = scores.iter().filter(|(_, a)| *a).count();
    Ok(AttackReport {
        n_present,
        n_absent: scores.len() - n_present,
        auc: auc(&scores)?,
        auc_noisy: if opts.noise_lambda.is_some() {
            Some(auc(&noisy_scores)?)
        } else {
            None
        },
        targets: detail,
    })
}

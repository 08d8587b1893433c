//! Noise calibration and sampling.
//!
//! Laplace mechanism, Wasserstein calibration λ = c·W/ε, group budget
//! splitting, the trivial-quilt Markov Quilt scale, and an empirical
//! indistinguishability ratio checker for toy graphs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correlation::ModelKind;
use crate::error::{Error, Result};
use crate::graph::{DegreeStats, OrgGraph};
use crate::rng::stream;
use crate::transport::{w_infinity, DiscreteDistribution, SensitivityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyMode {
    Edge,
    Node,
    Group,
    Conditional,
    Global,
    Binomial,
}

impl PrivacyMode {
    pub const ALL: [PrivacyMode; 6] = [
        PrivacyMode::Edge,
        PrivacyMode::Node,
        PrivacyMode::Group,
        PrivacyMode::Conditional,
        PrivacyMode::Global,
        PrivacyMode::Binomial,
    ];

    pub fn model_kind(&self) -> Option<ModelKind> {
        match self {
            PrivacyMode::Conditional => Some(ModelKind::Conditional),
            PrivacyMode::Global => Some(ModelKind::Global),
            PrivacyMode::Binomial => Some(ModelKind::Binomial),
            _ => None,
        }
    }
}

impl std::fmt::Display for PrivacyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrivacyMode::Edge => "edge",
            PrivacyMode::Node => "node",
            PrivacyMode::Group => "group",
            PrivacyMode::Conditional => "conditional",
            PrivacyMode::Global => "global",
            PrivacyMode::Binomial => "binomial",
        })
    }
}

impl std::str::FromStr for PrivacyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(PrivacyMode::Edge),
            "node" => Ok(PrivacyMode::Node),
            "group" => Ok(PrivacyMode::Group),
            "conditional" => Ok(PrivacyMode::Conditional),
            "global" => Ok(PrivacyMode::Global),
            "binomial" => Ok(PrivacyMode::Binomial),
            other => Err(Error::InvalidParameter(format!("unknown mode {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub epsilon: f64,
    /// Markov-Quilt correction / DPSU slack; must stay below epsilon.
    pub delta: f64,
    /// Per-record contribution cap c.
    pub cap: usize,
    pub mode: PrivacyMode,
    pub seed: u64,
}

impl MechanismConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.cap < 1 {
            return Err(Error::InvalidParameter("cap must be at least 1".into()));
        }
        if !(0.0..=f64::INFINITY).contains(&self.delta) || self.delta >= self.epsilon {
            return Err(Error::InvalidParameter(
                "delta must satisfy 0 <= delta < epsilon".into(),
            ));
        }
        Ok(())
    }
}

/// Where calibration takes its sensitivity W from.
pub enum SensitivitySource<'a> {
    /// Edge and node modes: W = 1 by construction.
    Unit,
    /// Group mode: W is the quilt size 2 * D_max - 1.
    Graph(&'a DegreeStats),
    /// Correlation-model modes: W from a fitted sensitivity report.
    Report(&'a SensitivityReport),
}

/// Calibrated Laplace scale with full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseScale {
    pub lambda: f64,
    pub w: f64,
    pub mode: PrivacyMode,
    pub cap: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// λ = c·W/ε for the requested mode.
pub fn calibrate(config: &MechanismConfig, source: &SensitivitySource) -> Result<NoiseScale> {
    config.validate()?;
    let w = match (config.mode, source) {
        (PrivacyMode::Edge | PrivacyMode::Node, _) => 1.0,
        (PrivacyMode::Group, SensitivitySource::Graph(stats)) => (2 * stats.d_max - 1) as f64,
        (PrivacyMode::Group, _) => {
            return Err(Error::MissingReport {
                mode: config.mode.to_string(),
                expected: "graph degree stats".into(),
            })
        }
        (mode, SensitivitySource::Report(report)) => {
            let expected = mode.model_kind().expect("model mode");
            if report.kind != expected {
                return Err(Error::ReportKindMismatch {
                    mode: mode.to_string(),
                    got: report.kind.to_string(),
                });
            }
            report.w
        }
        (mode, _) => {
            return Err(Error::MissingReport {
                mode: mode.to_string(),
                expected: mode.model_kind().expect("model mode").to_string(),
            })
        }
    };
    Ok(NoiseScale {
        lambda: config.cap as f64 * w / config.epsilon,
        w,
        mode: config.mode,
        cap: config.cap,
        epsilon: config.epsilon,
        seed: config.seed,
    })
}

/// Budget split for group privacy: an ε/k mechanism protects groups of k.
pub fn group_budget(epsilon: f64, k: u64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("group size must be at least 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    Ok(epsilon / k as f64)
}

/// Markov Quilt Laplace scale for an L-Lipschitz query:
/// L·|D_N|/(ε − δ). With the trivial quilt, |D_N| = 2·D_max − 1 and δ = 0.
pub fn markov_quilt_scale(l: f64, d_n_card: u64, epsilon: f64, delta: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("Lipschitz constant must be positive".into()));
    }
    if d_n_card < 1 {
        return Err(Error::InvalidParameter("|D_N| must be at least 1".into()));
    }
    if !(delta >= 0.0) || epsilon <= delta {
        return Err(Error::InvalidParameter(
            "requires epsilon > delta >= 0".into(),
        ));
    }
    Ok(l * d_n_card as f64 / (epsilon - delta))
}

/// Laplace(0, scale) quantile function. `u = 0.5` maps to the median 0.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    let centered = u - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// One inverse-CDF draw from Laplace(0, scale).
pub fn laplace_sample<R: Rng>(scale: f64, rng: &mut R) -> f64 {
    // gen() is in [0, 1); nudge 0 off the singular endpoint
    let u = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    laplace_inverse_cdf(u, scale)
}

/// Seeded Laplace noise stream.
pub struct LaplaceSampler {
    scale: f64,
    rng: ChaCha8Rng,
}

impl LaplaceSampler {
    /// `label` names the stream so distinct mechanism invocations under the
    /// same run seed draw independent noise.
    pub fn new(scale: f64, seed: u64, label: &str) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Laplace scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self {
            scale,
            rng: stream(seed, label),
        })
    }

    pub fn for_scale(scale: &NoiseScale, label: &str) -> Result<Self> {
        Self::new(scale.lambda, scale.seed, label)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sample(&mut self) -> f64 {
        laplace_sample(self.scale, &mut self.rng)
    }
}

fn laplace_pdf(x: f64, scale: f64) -> f64 {
    (-x.abs() / scale).exp() / (2.0 * scale)
}

/// Fully specified toy generation model θ for the ratio check: a pairwise
/// binary Markov random field over edge secrets,
/// Pr(X) ∝ exp(field·ΣX_i + coupling·Σ_{i adj j} X_i X_j).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyTheta {
    pub field: f64,
    pub coupling: f64,
}

impl ToyTheta {
    pub fn validate(&self) -> Result<()> {
        if !self.field.is_finite() || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter("theta parameters must be finite".into()));
        }
        Ok(())
    }
}

const RATIO_CHECK_MAX_EDGES: usize = 5;
/// Output bin width is lambda / RATIO_BINS_PER_SCALE, range ±10 lambda.
const RATIO_BINS_PER_SCALE: f64 = 10.0;
const RATIO_RANGE_SCALES: f64 = 10.0;
const RATIO_MIN_MASS: f64 = 1e-6;
/// A correctly calibrated mechanism sits exactly at e^ε in the tails, so the
/// violation flag allows 5% slack for binning and float error.
const RATIO_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub epsilon: f64,
    pub lambda: f64,
    /// max over edges and output bins of |log density ratio|
    pub max_log_ratio: f64,
    pub per_edge: Vec<f64>,
    pub violated: bool,
}

struct ToyJoint {
    /// probability per secret configuration bitmask
    probs: Vec<f64>,
    edge_count: usize,
}

fn toy_joint(graph: &OrgGraph, theta: &ToyTheta) -> Result<ToyJoint> {
    theta.validate()?;
    let m = graph.edge_count();
    if m > RATIO_CHECK_MAX_EDGES {
        return Err(Error::ToyGraphTooLarge {
            max: RATIO_CHECK_MAX_EDGES,
            got: m,
        });
    }
    // adjacent edge pairs
    let mut adjacent: Vec<(usize, usize)> = Vec::new();
    for e in graph.edge_ids() {
        for n in graph.neighborhood(e) {
            if e.0 < n.0 {
                adjacent.push((e.0 as usize, n.0 as usize));
            }
        }
    }
    let mut weights = Vec::with_capacity(1 << m);
    for config in 0u32..(1 << m) {
        let ones = config.count_ones() as f64;
        let pairs = adjacent
            .iter()
            .filter(|&&(i, j)| config & (1 << i) != 0 && config & (1 << j) != 0)
            .count() as f64;
        weights.push((theta.field * ones + theta.coupling * pairs).exp());
    }
    let total: f64 = weights.iter().sum();
    Ok(ToyJoint {
        probs: weights.into_iter().map(|w| w / total).collect(),
        edge_count: m,
    })
}

impl ToyJoint {
    /// Distribution of the total labeled count f(X) conditioned on edge i
    /// being in state `present`.
    fn count_given(&self, edge: usize, present: bool) -> Result<DiscreteDistribution> {
        let mut counts = vec![0.0f64; self.edge_count + 1];
        let mut total = 0.0;
        for (config, &p) in self.probs.iter().enumerate() {
            if (config & (1 << edge) != 0) == present {
                counts[(config as u32).count_ones() as usize] += p;
                total += p;
            }
        }
        if total <= 0.0 {
            return Err(Error::ZeroProbabilitySecret);
        }
        let mut support = Vec::new();
        let mut masses = Vec::new();
        for (f, &mass) in counts.iter().enumerate() {
            if mass > 0.0 {
                support.push(f as i64);
                masses.push(mass / total);
            }
        }
        DiscreteDistribution::new(support, masses)
    }
}

/// True maximal ∞-Wasserstein sensitivity of the count query under θ:
/// max over edges of W∞ between the two conditional count distributions.
pub fn theta_w_infinity(graph: &OrgGraph, theta: &ToyTheta) -> Result<f64> {
    let joint = toy_joint(graph, theta)?;
    let mut w = 0.0f64;
    for i in 0..joint.edge_count {
        let mu = joint.count_given(i, false)?;
        let nu = joint.count_given(i, true)?;
        w = w.max(w_infinity(&mu, &nu)?);
    }
    Ok(w)
}

/// Empirical Pufferfish check: enumerate both conditional output densities of
/// the Laplace count mechanism exactly and report the worst log ratio over a
/// binned output range. `violated` is set when the ratio exceeds e^ε.
pub fn pufferfish_ratio_check(
    graph: &OrgGraph,
    theta: &ToyTheta,
    lambda: f64,
    epsilon: f64,
) -> Result<RatioCheck> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let joint = toy_joint(graph, theta)?;

    let bin_width = lambda / RATIO_BINS_PER_SCALE;
    let lo = -RATIO_RANGE_SCALES * lambda;
    let hi = joint.edge_count as f64 + RATIO_RANGE_SCALES * lambda;
    let bins = ((hi - lo) / bin_width).ceil() as usize;

    let mut per_edge = Vec::with_capacity(joint.edge_count);
    for i in 0..joint.edge_count {
        let mu = joint.count_given(i, false)?;
        let nu = joint.count_given(i, true)?;
        let density = |dist: &DiscreteDistribution, w: f64| -> f64 {
            dist.support()
                .iter()
                .zip(dist.masses())
                .map(|(&f, &p)| p * laplace_pdf(w - f as f64, lambda))
                .sum()
        };
        let mut worst = 0.0f64;
        for b in 0..bins {
            let center = lo + (b as f64 + 0.5) * bin_width;
            let d0 = density(&mu, center);
            let d1 = density(&nu, center);
            let mass = d0.max(d1) * bin_width;
            if mass <= RATIO_MIN_MASS || d0 <= 0.0 || d1 <= 0.0 {
                continue;
            }
            worst = worst.max((d0 / d1).ln().abs());
        }
        per_edge.push(worst);
    }

    let max_log_ratio = per_edge.iter().copied().fold(0.0, f64::max);
    Ok(RatioCheck {
        epsilon,
        lambda,
        max_log_ratio,
        per_edge,
        violated: max_log_ratio > epsilon * (1.0 + RATIO_TOLERANCE),
    })
}

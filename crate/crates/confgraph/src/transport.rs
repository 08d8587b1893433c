//! Discrete ∞-Wasserstein distance and scaled maximal sensitivity.
//!
//! For one-dimensional distributions the ∞-Wasserstein distance equals the
//! largest gap between the two quantile functions, so it can be computed
//! exactly by merging the two CDF step functions. A brute-force bottleneck
//! feasibility oracle over the coupling definition guards that shortcut on
//! small supports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete};

use crate::correlation::{BinomialModel, ConditionalModel, GlobalModel, ModelKind};
use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-9;

/// Smallest relative atom mass kept by [`DiscreteDistribution::binomial`].
pub const BINOMIAL_MASS_FLOOR: f64 = 1e-12;

/// Finite probability mass function over integer values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<i64>,
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    /// `support` must be strictly increasing; `masses` must be non-negative
    /// and sum to 1 within 1e-9.
    pub fn new(support: Vec<i64>, masses: Vec<f64>) -> Result<Self> {
        if support.len() != masses.len() {
            return Err(Error::InvalidDistribution(
                "support and masses have different lengths".into(),
            ));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "support is not strictly increasing".into(),
            ));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite mass".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Unnormalized(total));
        }
        Ok(Self { support, masses })
    }

    pub fn point_mass(x: i64) -> Self {
        Self {
            support: vec![x],
            masses: vec![1.0],
        }
    }

    /// Normalized histogram from integer counts.
    pub fn from_counts(counts: &BTreeMap<i64, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("all counts are zero".into()));
        }
        let mut support = Vec::with_capacity(counts.len());
        let mut masses = Vec::with_capacity(counts.len());
        for (&w, &c) in counts {
            if c > 0 {
                support.push(w);
                masses.push(c as f64 / total as f64);
            }
        }
        Self::new(support, masses)
    }

    /// Binomial(n, p) pmf over 0..=n, truncated to atoms carrying at least
    /// `BINOMIAL_MASS_FLOOR` of the total mass. For large n the extreme tails
    /// underflow to values below the cumulative-sum resolution, which would
    /// make quantiles at those levels an artifact of rounding; dropping them
    /// and renormalizing keeps the distribution well defined.
    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "binomial probability {p} outside [0, 1]"
            )));
        }
        let dist = Binomial::new(p, n)
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let pmf: Vec<f64> = (0..=n).map(|k| dist.pmf(k)).collect();
        let total: f64 = pmf.iter().sum();
        let mut support = Vec::new();
        let mut masses = Vec::new();
        let mut kept = 0.0;
        for (k, &m) in pmf.iter().enumerate() {
            if m >= BINOMIAL_MASS_FLOOR * total {
                support.push(k as i64);
                masses.push(m);
                kept += m;
            }
        }
        for m in &mut masses {
            *m /= kept;
        }
        Self::new(support, masses)
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass_at(&self, x: i64) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }

    /// Atoms with strictly positive mass.
    fn positive_atoms(&self) -> (Vec<i64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ps = Vec::new();
        for (&x, &p) in self.support.iter().zip(&self.masses) {
            if p > 0.0 {
                xs.push(x);
                ps.push(p);
            }
        }
        (xs, ps)
    }
}

impl Serialize for DiscreteDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<i64, f64> = self
            .support
            .iter()
            .zip(&self.masses)
            .map(|(&x, &m)| (x, m))
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // JSON object keys are strings, so parse them back to integers
        let raw = BTreeMap::<String, f64>::deserialize(d)?;
        let mut map = BTreeMap::new();
        for (k, v) in raw {
            let x: i64 = k
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("non-integer support value {k:?}")))?;
            map.insert(x, v);
        }
        let support: Vec<i64> = map.keys().copied().collect();
        let masses: Vec<f64> = map.values().copied().collect();
        DiscreteDistribution::new(support, masses).map_err(serde::de::Error::custom)
    }
}

/// Running CDF values for a mass vector, with the final entry pinned to
/// exactly 1.0 so two normalized inputs share the same terminal level.
fn cumulative(masses: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = masses
        .iter()
        .map(|&m| {
            acc += m;
            acc
        })
        .collect();
    *cdf.last_mut().unwrap() = 1.0;
    cdf
}

/// ∞-Wasserstein distance between two discrete distributions, computed as the
/// maximum gap between the two inverse CDFs. The merge walks both CDF step
/// functions with exact comparisons and only records a gap when the current
/// level interval has positive width, so zero-mass float artifacts in deep
/// tails never contribute.
pub fn w_infinity(mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Result<f64> {
    let (xa, pa) = mu.positive_atoms();
    let (xb, pb) = nu.positive_atoms();
    let ca = cumulative(&pa);
    let cb = cumulative(&pb);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut prev = 0.0f64;
    let mut best = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let level = ca[i].min(cb[j]);
        if level > prev {
            best = best.max((xa[i] - xb[j]).abs() as f64);
        }
        if ca[i] <= level {
            i += 1;
        }
        if cb[j] <= level {
            j += 1;
        }
        prev = level;
    }
    Ok(best)
}

const ORACLE_MAX_SUPPORT: usize = 12;

/// Independent verification path for [`w_infinity`]: scan candidate
/// thresholds t = |x - y| ascending and return the smallest for which a
/// transport plan moving no mass farther than t exists. Feasibility is the
/// Gale/Hall condition on the bipartite move graph, checked by subset
/// enumeration, so supports are limited to a few atoms.
pub fn w_infinity_oracle(mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Result<f64> {
    let (xa, pa) = mu.positive_atoms();
    let (xb, pb) = nu.positive_atoms();
    if xa.len() > ORACLE_MAX_SUPPORT {
        return Err(Error::OracleSupportTooLarge {
            max: ORACLE_MAX_SUPPORT,
            got: xa.len(),
        });
    }
    let mut candidates: Vec<i64> = xa
        .iter()
        .flat_map(|&x| xb.iter().map(move |&y| (x - y).abs()))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    for &t in &candidates {
        if bottleneck_feasible(&xa, &pa, &xb, &pb, t) {
            return Ok(t as f64);
        }
    }
    // the largest candidate connects every pair, so this is unreachable for
    // normalized inputs
    Ok(*candidates.last().unwrap() as f64)
}

/// Gale/Hall feasibility: for every subset S of supply atoms, the mass of S
/// must not exceed the demand mass reachable within distance t.
fn bottleneck_feasible(xa: &[i64], pa: &[f64], xb: &[i64], pb: &[f64], t: i64) -> bool {
    let n = xa.len();
    // reachable demand sets as bitmasks
    let reach: Vec<u64> = xa
        .iter()
        .map(|&x| {
            xb.iter()
                .enumerate()
                .filter(|(_, &y)| (x - y).abs() <= t)
                .fold(0u64, |m, (l, _)| m | (1 << l))
        })
        .collect();
    for subset in 1u64..(1 << n) {
        let mut supply = 0.0;
        let mut neighbors = 0u64;
        for (k, &r) in reach.iter().enumerate() {
            if subset & (1 << k) != 0 {
                supply += pa[k];
                neighbors |= r;
            }
        }
        let mut demand = 0.0;
        for (l, &p) in pb.iter().enumerate() {
            if neighbors & (1 << l) != 0 {
                demand += p;
            }
        }
        if supply > demand + MASS_TOLERANCE {
            return false;
        }
    }
    true
}

/// Bucket scale factor for the conditional model: the bucket's neighborhood
/// size upper bound, capped at the largest neighborhood in the graph.
pub fn bucket_scale(log_deg: u32, n_max: usize) -> f64 {
    (n_max as f64).min(10f64.powi(log_deg as i32 + 1))
}

/// One scaled sensitivity measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub log_freq: Option<u32>,
    pub log_deg: Option<u32>,
    pub w_inf: f64,
    pub scale: f64,
    pub w: f64,
}

impl SensitivityEntry {
    pub fn scaled(log_freq: u32, log_deg: u32, w_inf: f64, n_max: usize) -> Self {
        let scale = bucket_scale(log_deg, n_max);
        Self {
            log_freq: Some(log_freq),
            log_deg: Some(log_deg),
            w_inf,
            scale,
            w: w_inf * scale,
        }
    }
}

/// Per-bucket (or per-model) ∞-Wasserstein values and the final maximal
/// sensitivity W used for noise calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub kind: ModelKind,
    pub n_max: usize,
    pub entries: Vec<SensitivityEntry>,
    /// max over entries of the scaled value
    pub w: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p1: Option<f64>,
}

impl SensitivityReport {
    fn from_entries(
        kind: ModelKind,
        n_max: usize,
        entries: Vec<SensitivityEntry>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NoComputableBucket);
        }
        let w = entries.iter().map(|e| e.w).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            kind,
            n_max,
            entries,
            w,
            p0: None,
            p1: None,
        })
    }

    /// CSV mirroring the per-bucket table: `log_freq,log_deg,w_inf,W`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["log_freq", "log_deg", "w_inf", "W"])?;
        for e in &self.entries {
            wtr.write_record([
                e.log_freq.map(|v| v.to_string()).unwrap_or_default(),
                e.log_deg.map(|v| v.to_string()).unwrap_or_default(),
                e.w_inf.to_string(),
                e.w.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Per-bucket W∞ between the two secret-state distributions, scaled by the
/// bucket's neighborhood size bound; the final W is the max over buckets.
/// Buckets missing a state fall back to the model's global distributions when
/// available and are skipped otherwise.
pub fn compute_w_conditional(model: &ConditionalModel, n_max: usize) -> Result<SensitivityReport> {
    let mut entries = Vec::new();
    for cell in &model.cells {
        let absent = cell
            .absent
            .as_ref()
            .or_else(|| model.fallback.as_ref().map(|g| &g.absent));
        let present = cell
            .present
            .as_ref()
            .or_else(|| model.fallback.as_ref().map(|g| &g.present));
        let (Some(absent), Some(present)) = (absent, present) else {
            continue;
        };
        let w_inf = w_infinity(absent, present)?;
        entries.push(SensitivityEntry::scaled(cell.log_freq, cell.log_deg, w_inf, n_max));
    }
    SensitivityReport::from_entries(ModelKind::Conditional, n_max, entries)
}

/// Single W∞ between the pooled state histograms; no scaling, the histograms
/// already range over neighborhood counts.
pub fn compute_w_global(model: &GlobalModel, n_max: usize) -> Result<SensitivityReport> {
    let w_inf = w_infinity(&model.absent, &model.present)?;
    SensitivityReport::from_entries(
        ModelKind::Global,
        n_max,
        vec![SensitivityEntry {
            log_freq: None,
            log_deg: None,
            w_inf,
            scale: 1.0,
            w: w_inf,
        }],
    )
}

/// W∞ between Binomial(deg, p0) and Binomial(deg, p1) with exact CDFs.
/// `deg` is the evaluation degree, by default the worst case N_max.
pub fn compute_w_binomial(
    model: &BinomialModel,
    deg: u64,
    n_max: usize,
) -> Result<SensitivityReport> {
    let mu = DiscreteDistribution::binomial(deg, model.p0)?;
    let nu = DiscreteDistribution::binomial(deg, model.p1)?;
    let w_inf = w_infinity(&mu, &nu)?;
    let mut report = SensitivityReport::from_entries(
        ModelKind::Binomial,
        n_max,
        vec![SensitivityEntry {
            log_freq: None,
            log_deg: None,
            w_inf,
            scale: 1.0,
            w: w_inf,
        }],
    )?;
    report.p0 = Some(model.p0);
    report.p1 = Some(model.p1);
    Ok(report)
}

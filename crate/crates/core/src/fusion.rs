//! Score-scale alignment (Gaussian normalization statistics) and
//! aggregation of the three indices into the unified score.

use crate::error::{Error, Result};
use crate::math;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Where normalization statistics came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsSource {
    /// Computed over the evaluation set itself.
    EvaluationSet,
    /// Computed once over an unlabeled corpus and reused.
    FrozenCorpus,
}

/// Mean/std used to normalize one raw index into N(0,1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormStats {
    pub index_name: String,
    pub mean: f64,
    pub std: f64,
    pub source: StatsSource,
}

impl NormStats {
    pub fn new(index_name: &str, mean: f64, std: f64, source: StatsSource) -> Self {
        Self {
            index_name: index_name.to_string(),
            mean,
            std,
            source,
        }
    }

    /// Z-score of a raw value under these stats.
    pub fn zscore(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.std
    }
}

/// Sample mean and population standard deviation of a raw score set.
pub fn compute_norm_stats(
    raw_scores: &[f64],
    index_name: &str,
    source: StatsSource,
) -> Result<NormStats> {
    if raw_scores.len() < 2 {
        return Err(Error::Degenerate(format!(
            "stats for `{index_name}` need at least 2 scores"
        )));
    }
    let mean = math::mean(raw_scores);
    let std = math::std_pop(raw_scores);
    if std == 0.0 || !std.is_finite() {
        return Err(Error::Degenerate(format!(
            "stats for `{index_name}` have zero variance"
        )));
    }
    Ok(NormStats::new(index_name, mean, std, source))
}

/// The unified zero-shot index: plain sum of the three rescaled components.
pub fn bvqi(q_a: f64, q_s: f64, q_t: f64) -> f64 {
    q_a + q_s + q_t
}

/// Alignment/fusion strategies for the aggregation ablation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    /// Gaussian normalization + sigmoid rescaling, then addition (default).
    SigmoidAddition,
    /// Raw direction-aligned scores added with no rescaling.
    DirectAddition,
    /// Gaussian normalization only, then addition.
    LinearAddition,
    /// Gaussian normalization + sigmoid rescaling, then multiplication.
    SigmoidMultiplication,
}

impl std::str::FromStr for AggregationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid-add" | "sigmoid-addition" => Ok(Self::SigmoidAddition),
            "direct-add" | "direct-addition" => Ok(Self::DirectAddition),
            "linear-add" | "linear-addition" => Ok(Self::LinearAddition),
            "sigmoid-mult" | "sigmoid-multiplication" => Ok(Self::SigmoidMultiplication),
            other => Err(Error::InvalidMode(other.to_string())),
        }
    }
}

/// Fuse components that were already prepared for the given mode
/// (rescaled for the sigmoid modes, aligned raw/z-scores otherwise).
pub fn aggregate_variant(q_a: f64, q_s: f64, q_t: f64, mode: AggregationMode) -> f64 {
    match mode {
        AggregationMode::SigmoidAddition
        | AggregationMode::DirectAddition
        | AggregationMode::LinearAddition => q_a + q_s + q_t,
        AggregationMode::SigmoidMultiplication => q_a * q_s * q_t,
    }
}

/// Per-video raw and rescaled scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexBundle {
    /// Semantic affinity score in (0,1).
    pub q_a: f64,
    /// Per-prompt-pair semantic scores (fine-tuning path).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub q_a_per_pair: BTreeMap<String, f64>,
    /// Spatial naturalness in (0,1).
    pub q_s: f64,
    /// Temporal naturalness in (0,1).
    pub q_t: f64,
    /// Implicit-prompt score, present only for fine-tuned scoring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_implicit: Option<f64>,
    /// Aggregated score.
    pub q_unified: f64,
    /// Raw (pre-rescaling) values, kept for stats passes and ablations.
    pub raw_mpda: f64,
    pub raw_niqe_mean: f64,
    pub raw_tpqi: f64,
}

/// Stats-file helpers: a JSON list of records, shared by all indices.
pub fn save_stats(stats: &[NormStats], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(file, stats)?;
    Ok(())
}

pub fn load_stats(path: &Path) -> Result<Vec<NormStats>> {
    let file = std::fs::File::open(path).map_err(|_| {
        Error::MissingStats(path.display().to_string())
    })?;
    Ok(serde_json::from_reader(file)?)
}

/// Look up stats for one index by name.
pub fn find_stats<'a>(stats: &'a [NormStats], index_name: &str) -> Result<&'a NormStats> {
    stats
        .iter()
        .find(|s| s.index_name == index_name)
        .ok_or_else(|| Error::MissingStats(index_name.to_string()))
}

//! Temporal patch shuffle and the Upsample baseline.
//!
//! The forecasting pipeline joins look-back and horizon, unfolds overlapping
//! windows, shuffles a low-variance subset of them within each batch element,
//! folds back by overlap averaging and splits at the original look-back
//! length. Ablation variants and the classification form reuse the same
//! kernel.

mod freq;
mod pipeline;
mod shuffle;
mod upsample;
mod variance;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TpsError};
use crate::rng::{self, RngStream};
use crate::series::{merge_batches, SplitPair};

pub use freq::{frequency_shuffle, frequency_shuffle_planned, from_spectrum, to_spectrum};
pub use pipeline::{
    content_key, shuffle_series, shuffle_series_planned, tps_classification, tps_classification_keyed, tps_forecasting,
    tps_forecasting_with, tps_variant,
};
pub use shuffle::{
    apply_shuffle, plan_shuffle, plan_shuffle_with, select_lowest, ElementPlan, Selection,
    ShufflePlan,
};
pub use upsample::{interpolate_linear, upsample_baseline};
pub use variance::{patch_variance, PatchScores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Standard,
    /// Uniform random patch subset instead of lowest-variance first.
    NoVarianceOrder,
    /// Stride forced to the patch length.
    NonOverlapping,
    /// Look-back shuffled alone, horizon returned untouched.
    InputOnly,
    /// Patching applied to the stacked real/imaginary spectrum.
    FrequencyDomain,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Standard,
        Variant::NoVarianceOrder,
        Variant::NonOverlapping,
        Variant::InputOnly,
        Variant::FrequencyDomain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::NoVarianceOrder => "no-variance-order",
            Variant::NonOverlapping => "non-overlapping",
            Variant::InputOnly => "input-only",
            Variant::FrequencyDomain => "frequency-domain",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = TpsError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| TpsError::Config(format!("unknown variant {s:?}")))
    }
}

/// How per-element random streams are keyed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    /// Keyed by position within the batch.
    #[default]
    Batch,
    /// Keyed by sample identity, so reordering samples reorders outputs.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpsConfig {
    pub patch_len: usize,
    pub stride: usize,
    /// Shuffle rate in `(0, 1]`.
    pub alpha: f64,
    pub seed: u64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub level: Level,
}

impl TpsConfig {
    pub fn new(patch_len: usize, stride: usize, alpha: f64) -> Self {
        Self {
            patch_len,
            stride,
            alpha,
            seed: 0,
            variant: Variant::Standard,
            level: Level::Batch,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_level(mut self, level: Level) -> Self {
        self.level = level;
        self
    }

    /// Checks the parameter invariants for data with `channels` channels.
    pub fn validate(&self, channels: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(TpsError::Config(format!(
                "shuffle rate must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.patch_len == 0 || self.stride == 0 {
            return Err(TpsError::Config(format!(
                "patch length and stride must be positive, got p={} s={}",
                self.patch_len, self.stride
            )));
        }
        if channels * self.patch_len <= 1 {
            return Err(TpsError::DegenerateVariance(channels * self.patch_len));
        }
        Ok(())
    }

    /// `floor(α · N_p)`.
    pub fn shuffled_count(&self, n_patches: usize) -> usize {
        shuffled_count(self.alpha, n_patches)
    }
}

pub(crate) fn shuffled_count(alpha: f64, n_patches: usize) -> usize {
    ((alpha * n_patches as f64).floor() as usize).min(n_patches)
}

/// An augmentation that turns a batch of windows into synthetic windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Tps(TpsConfig),
    Upsample { segment_rate: f64 },
}

impl Method {
    /// One synthetic batch, all randomness drawn from `stream`.
    pub fn synthesize(&self, pair: &SplitPair, stream: RngStream) -> Result<SplitPair> {
        match self {
            Method::Tps(cfg) => tps_forecasting_with(pair, cfg, stream),
            Method::Upsample { segment_rate } => upsample_baseline(pair, *segment_rate, stream),
        }
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        match self {
            Method::Tps(cfg) => cfg.validate(channels),
            Method::Upsample { segment_rate } if !(*segment_rate > 0.0 && *segment_rate <= 1.0) => {
                Err(TpsError::Config(format!(
                    "segment rate must lie in (0, 1], got {segment_rate}"
                )))
            }
            Method::Upsample { .. } => Ok(()),
        }
    }
}

/// Number of synthetic samples kept out of `batch` at augmentation ratio `ratio`.
pub fn retained_count(ratio: f64, batch: usize) -> usize {
    ((ratio * batch as f64).round() as usize).min(batch)
}

/// Originals followed by `size` independent synthetic replicas, each thinned
/// to `ratio` of the batch.
///
/// Replica `r` draws from `stream.derive(r)`; the retained subset of replica
/// `r` is chosen from a separate child stream so thinning never perturbs the
/// augmentation itself.
pub fn augment_batch(
    pair: &SplitPair,
    method: &Method,
    size: usize,
    ratio: f64,
    stream: RngStream,
) -> Result<SplitPair> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(TpsError::Config(format!(
            "augmentation ratio must lie in [0, 1], got {ratio}"
        )));
    }
    let keep = retained_count(ratio, pair.batch());
    let mut merged = pair.clone();
    if keep == 0 {
        return Ok(merged);
    }
    let thinning = stream.derive(u64::MAX);
    for r in 0..size as u64 {
        let synthetic = method.synthesize(pair, stream.derive(r))?;
        let synthetic = if keep < pair.batch() {
            let mut idx = rng::subset(pair.batch(), keep, &mut thinning.derive(r).rng());
            idx.sort_unstable();
            synthetic.select(&idx)?
        } else {
            synthetic
        };
        merged = merge_batches(&merged, &synthetic)?;
    }
    Ok(merged)
}

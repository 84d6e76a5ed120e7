use crate::error::{Result, TpsError};
use crate::series::SeriesBatch;

use super::point::check_same_shape;

/// The nine quantile levels used for probabilistic evaluation.
pub const DEFAULT_LEVELS: [f64; 9] = [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95];

/// Strictly increasing quantile levels in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSet {
    levels: Vec<f64>,
}

impl QuantileSet {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(TpsError::Config("quantile set is empty".into()));
        }
        if levels.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(TpsError::Config(format!(
                "quantile levels must lie in (0, 1): {levels:?}"
            )));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TpsError::Config(format!(
                "quantile levels must be strictly increasing: {levels:?}"
            )));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn position(&self, level: f64) -> Option<usize> {
        self.levels.iter().position(|&t| t == level)
    }

    /// Indices of the 0.1 and 0.9 levels bounding the 80% interval.
    pub fn pi80_positions(&self) -> Result<(usize, usize)> {
        match (self.position(0.1), self.position(0.9)) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(TpsError::Config(
                "80% interval needs the 0.1 and 0.9 levels".into(),
            )),
        }
    }
}

impl Default for QuantileSet {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS.to_vec(),
        }
    }
}

#[inline]
fn check_loss(tau: f64, y: f64, q: f64) -> f64 {
    tau * (y - q).max(0.0) + (1.0 - tau) * (q - y).max(0.0)
}

/// Mean check loss over all levels and entries.
pub fn pinball(target: &SeriesBatch, quantiles: &[SeriesBatch], levels: &QuantileSet) -> Result<f64> {
    if quantiles.len() != levels.levels().len() {
        return Err(TpsError::Config(format!(
            "{} quantile predictions for {} levels",
            quantiles.len(),
            levels.levels().len()
        )));
    }
    let mut total = 0.0;
    for (pred, &tau) in quantiles.iter().zip(levels.levels()) {
        check_same_shape(target, pred)?;
        let sum: f64 = target
            .as_slice()
            .iter()
            .zip(pred.as_slice())
            .map(|(&y, &q)| check_loss(tau, y, q))
            .sum();
        total += sum / target.as_slice().len() as f64;
    }
    Ok(total / quantiles.len() as f64)
}

/// Quantile-approximated CRPS: twice the level-averaged pinball loss.
pub fn crps(target: &SeriesBatch, quantiles: &[SeriesBatch], levels: &QuantileSet) -> Result<f64> {
    Ok(2.0 * pinball(target, quantiles, levels)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStats {
    /// Fraction of entries with `q10 ≤ y ≤ q90`.
    pub coverage: f64,
    /// Mean of `q90 − q10`.
    pub width: f64,
}

pub fn pi80(target: &SeriesBatch, q10: &SeriesBatch, q90: &SeriesBatch) -> Result<IntervalStats> {
    check_same_shape(target, q10)?;
    check_same_shape(target, q90)?;
    let n = target.as_slice().len() as f64;
    let mut inside = 0usize;
    let mut width = 0.0;
    for ((&y, &lo), &hi) in target.as_slice().iter().zip(q10.as_slice()).zip(q90.as_slice()) {
        if lo <= y && y <= hi {
            inside += 1;
        }
        width += hi - lo;
    }
    Ok(IntervalStats {
        coverage: inside as f64 / n,
        width: width / n,
    })
}

use crate::error::{Result, TpsError};
use crate::series::SeriesBatch;

pub(crate) fn check_same_shape(target: &SeriesBatch, other: &SeriesBatch) -> Result<()> {
    if target.shape() != other.shape() {
        return Err(TpsError::Data(format!(
            "shape mismatch: {:?} vs {:?}",
            target.shape(),
            other.shape()
        )));
    }
    if target.is_empty() {
        return Err(TpsError::EmptySample);
    }
    Ok(())
}

/// `‖F − F̂‖²_F / (B·h·C)`.
pub fn mse(target: &SeriesBatch, prediction: &SeriesBatch) -> Result<f64> {
    check_same_shape(target, prediction)?;
    let sum: f64 = target
        .as_slice()
        .iter()
        .zip(prediction.as_slice())
        .map(|(y, q)| (y - q) * (y - q))
        .sum();
    Ok(sum / target.as_slice().len() as f64)
}

pub fn mae(target: &SeriesBatch, prediction: &SeriesBatch) -> Result<f64> {
    check_same_shape(target, prediction)?;
    let sum: f64 = target
        .as_slice()
        .iter()
        .zip(prediction.as_slice())
        .map(|(y, q)| (y - q).abs())
        .sum();
    Ok(sum / target.as_slice().len() as f64)
}

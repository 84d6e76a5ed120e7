use crate::error::{Result, TpsError};
use crate::par;
use crate::patching::PatchTensor;

/// Per-patch sample variance, shape `[B, N_p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchScores {
    values: Vec<f64>,
    batch: usize,
    n_patches: usize,
}

impl PatchScores {
    pub fn from_raw(values: Vec<f64>, batch: usize, n_patches: usize) -> Result<Self> {
        if values.len() != batch * n_patches {
            return Err(TpsError::PlanMismatch(format!(
                "{} scores for [{batch}, {n_patches}]",
                values.len()
            )));
        }
        Ok(Self {
            values,
            batch,
            n_patches,
        })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn n_patches(&self) -> usize {
        self.n_patches
    }

    pub fn row(&self, b: usize) -> &[f64] {
        &self.values[b * self.n_patches..(b + 1) * self.n_patches]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Corrected two-pass variance with denominator `n − 1`: the second pass
/// subtracts the rounding error left in the mean.
///
/// A constant patch scores exactly zero.
fn sample_variance(values: &[f64]) -> f64 {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut ss, mut drift) = (0.0, 0.0);
    for &v in values {
        let d = v - mean;
        ss += d * d;
        drift += d;
    }
    (ss - drift * drift / n) / (n - 1.0)
}

/// Variance of each patch over all of its `C·p` entries jointly.
pub fn patch_variance(patches: &PatchTensor) -> Result<PatchScores> {
    let size = patches.patch_size();
    if size <= 1 {
        return Err(TpsError::DegenerateVariance(size));
    }
    let n_patches = patches.num_patches();
    let rows = par::map_range(patches.batch(), |b| {
        patches
            .element(b)
            .chunks_exact(size)
            .map(sample_variance)
            .collect::<Vec<_>>()
    });
    Ok(PatchScores {
        values: rows.concat(),
        batch: patches.batch(),
        n_patches,
    })
}

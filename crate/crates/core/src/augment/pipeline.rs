use sha2::{Digest, Sha256};

use crate::error::{Result, TpsError};
use crate::patching::{reconstruct, unfold};
use crate::rng::RngStream;
use crate::series::{split_time, SeriesBatch, SplitPair};

use super::freq::frequency_shuffle;
use super::shuffle::{apply_shuffle, plan_shuffle_with, Selection, ShufflePlan};
use super::variance::{patch_variance, PatchScores};
use super::{Level, TpsConfig, Variant};

/// Unfold, shuffle a subset of patches per element, fold back.
///
/// `streams[b]` supplies all randomness for element `b`. Time indices no
/// window covers keep their value from `x`.
pub fn shuffle_series(
    x: &SeriesBatch,
    patch_len: usize,
    stride: usize,
    alpha: f64,
    selection: Selection,
    streams: &[RngStream],
) -> Result<SeriesBatch> {
    shuffle_series_planned(x, patch_len, stride, selection, |scores| {
        plan_shuffle_with(scores, alpha, streams, selection)
    })
}

/// [`shuffle_series`] with the plan built by `make_plan` from the patch
/// scores (all zero under [`Selection::Random`]).
pub fn shuffle_series_planned(
    x: &SeriesBatch,
    patch_len: usize,
    stride: usize,
    selection: Selection,
    make_plan: impl FnOnce(&PatchScores) -> Result<ShufflePlan>,
) -> Result<SeriesBatch> {
    let patches = unfold(x, patch_len, stride)?;
    let scores = match selection {
        Selection::LowestVariance => patch_variance(&patches)?,
        Selection::Random => PatchScores::from_raw(
            vec![0.0; x.batch() * patches.num_patches()],
            x.batch(),
            patches.num_patches(),
        )?,
    };
    let plan = make_plan(&scores)?;
    if plan.is_noop() {
        return reconstruct(&patches, Some(x));
    }
    reconstruct(&apply_shuffle(&patches, &plan)?, Some(x))
}

/// Stable 64-bit fingerprint of a sample's values.
pub fn content_key(sample: &[f64]) -> u64 {
    let mut hasher = Sha256::new();
    for v in sample {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn element_streams(x: &SeriesBatch, level: Level, stream: RngStream) -> Vec<RngStream> {
    match level {
        Level::Batch => (0..x.batch() as u64).map(|b| stream.derive(b)).collect(),
        Level::Sample => x.samples().map(|s| stream.derive(content_key(s))).collect(),
    }
}

/// The shared kernel on a full series for every variant but input-only.
fn augment_series(x: &SeriesBatch, cfg: &TpsConfig, streams: &[RngStream]) -> Result<SeriesBatch> {
    match cfg.variant {
        Variant::Standard => shuffle_series(
            x,
            cfg.patch_len,
            cfg.stride,
            cfg.alpha,
            Selection::LowestVariance,
            streams,
        ),
        Variant::NoVarianceOrder => {
            shuffle_series(x, cfg.patch_len, cfg.stride, cfg.alpha, Selection::Random, streams)
        }
        Variant::NonOverlapping => shuffle_series(
            x,
            cfg.patch_len,
            cfg.patch_len,
            cfg.alpha,
            Selection::LowestVariance,
            streams,
        ),
        Variant::FrequencyDomain => frequency_shuffle(x, cfg, streams),
        Variant::InputOnly => Err(TpsError::Config(
            "input-only variant needs a look-back/horizon pair".into(),
        )),
    }
}

/// Forecasting augmentation for any variant, drawing from `stream`.
pub fn tps_forecasting_with(pair: &SplitPair, cfg: &TpsConfig, stream: RngStream) -> Result<SplitPair> {
    cfg.validate(pair.channels())?;
    if pair.batch() == 0 {
        return Ok(pair.clone());
    }
    if cfg.variant == Variant::InputOnly {
        let lookback = pair.lookback();
        let streams = element_streams(lookback, cfg.level, stream);
        let standard = TpsConfig {
            variant: Variant::Standard,
            ..*cfg
        };
        let shuffled = augment_series(lookback, &standard, &streams)?;
        return SplitPair::new(shuffled, pair.horizon().clone());
    }
    let x = pair.concat();
    let streams = element_streams(&x, cfg.level, stream);
    let s = augment_series(&x, cfg, &streams)?;
    split_time(&s, pair.lookback_len())
}

/// Synthetic `(S_L, S_F)` from the standard algorithm, seeded by `cfg.seed`.
pub fn tps_forecasting(pair: &SplitPair, cfg: &TpsConfig) -> Result<SplitPair> {
    if cfg.variant != Variant::Standard {
        return Err(TpsError::Config(format!(
            "tps_forecasting runs the standard algorithm; use tps_variant for {}",
            cfg.variant.name()
        )));
    }
    tps_forecasting_with(pair, cfg, RngStream::new(cfg.seed))
}

/// One of the ablation variants, seeded by `cfg.seed`.
pub fn tps_variant(pair: &SplitPair, cfg: &TpsConfig) -> Result<SplitPair> {
    if cfg.variant == Variant::Standard {
        return Err(TpsError::Config(
            "tps_variant needs a non-standard variant".into(),
        ));
    }
    tps_forecasting_with(pair, cfg, RngStream::new(cfg.seed))
}

/// Classification form: each sample is shuffled on its own, keyed by its
/// content, with no look-back/horizon split.
pub fn tps_classification(x: &SeriesBatch, cfg: &TpsConfig) -> Result<SeriesBatch> {
    check_classification(x, cfg)?;
    let streams = element_streams(x, Level::Sample, RngStream::new(cfg.seed));
    augment_series(x, cfg, &streams)
}

/// Classification form with caller-supplied sample ids as stream keys.
pub fn tps_classification_keyed(x: &SeriesBatch, cfg: &TpsConfig, keys: &[u64]) -> Result<SeriesBatch> {
    check_classification(x, cfg)?;
    if keys.len() != x.batch() {
        return Err(TpsError::Config(format!(
            "{} sample keys for {} samples",
            keys.len(),
            x.batch()
        )));
    }
    let root = RngStream::new(cfg.seed);
    let streams: Vec<RngStream> = keys.iter().map(|&k| root.derive(k)).collect();
    augment_series(x, cfg, &streams)
}

fn check_classification(x: &SeriesBatch, cfg: &TpsConfig) -> Result<()> {
    cfg.validate(x.channels())?;
    if cfg.level != Level::Sample {
        return Err(TpsError::Config(
            "classification augmentation runs at sample level".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::shuffle::{ElementPlan, ShufflePlan};
    use crate::patching::unfold;

    fn noisy(b: usize, t: usize, c: usize, seed: u64) -> SeriesBatch {
        let mut state = seed;
        SeriesBatch::from_fn(b, t, c, |_, _, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .unwrap()
    }

    #[test]
    fn forced_reversal_non_overlapping() {
        let x = SeriesBatch::from_fn(1, 6, 1, |_, t, _| t as f64).unwrap();
        let patches = unfold(&x, 2, 2).unwrap();
        let plan = ShufflePlan::new(
            3,
            vec![ElementPlan {
                selected: vec![0, 1, 2],
                permutation: vec![2, 1, 0],
            }],
        )
        .unwrap();
        let out = reconstruct(&apply_shuffle(&patches, &plan).unwrap(), Some(&x)).unwrap();
        assert_eq!(out.as_slice(), &[4.0, 5.0, 2.0, 3.0, 0.0, 1.0]);
    }

    #[test]
    fn small_alpha_returns_input() {
        let x = noisy(3, 40, 2, 1);
        let pair = split_time(&x, 30).unwrap();
        // N_p = 19, alpha 0.1 -> N_s = 1
        let cfg = TpsConfig::new(4, 2, 0.1).with_seed(5);
        let out = tps_forecasting(&pair, &cfg).unwrap();
        for (a, b) in out.concat().as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pair = split_time(&noisy(4, 50, 3, 2), 30).unwrap();
        let cfg = TpsConfig::new(8, 3, 0.8).with_seed(77);
        let a = tps_forecasting(&pair, &cfg).unwrap();
        let b = tps_forecasting(&pair, &cfg).unwrap();
        assert_eq!(a, b);
        let c = tps_forecasting(&pair, &cfg.with_seed(78)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn output_shape_matches_input() {
        let pair = split_time(&noisy(2, 37, 3, 9), 25).unwrap();
        let cfg = TpsConfig::new(6, 4, 1.0).with_seed(1);
        let out = tps_forecasting(&pair, &cfg).unwrap();
        assert_eq!(out.lookback().shape(), pair.lookback().shape());
        assert_eq!(out.horizon().shape(), pair.horizon().shape());
    }

    #[test]
    fn patch_longer_than_series_is_geometry_error() {
        let pair = split_time(&noisy(1, 10, 1, 3), 5).unwrap();
        let cfg = TpsConfig::new(11, 1, 1.0);
        assert!(matches!(tps_forecasting(&pair, &cfg), Err(TpsError::Geometry(_))));
    }

    #[test]
    fn entry_points_check_variant() {
        let pair = split_time(&noisy(1, 10, 1, 3), 5).unwrap();
        let standard = TpsConfig::new(2, 1, 1.0);
        assert!(tps_variant(&pair, &standard).is_err());
        assert!(tps_forecasting(&pair, &standard.with_variant(Variant::InputOnly)).is_err());
    }

    #[test]
    fn input_only_keeps_horizon() {
        let pair = split_time(&noisy(3, 40, 2, 4), 28).unwrap();
        let cfg = TpsConfig::new(4, 2, 1.0)
            .with_seed(3)
            .with_variant(Variant::InputOnly);
        let out = tps_variant(&pair, &cfg).unwrap();
        assert_eq!(out.horizon(), pair.horizon());
        assert_ne!(out.lookback(), pair.lookback());
    }

    #[test]
    fn non_overlapping_is_pure_placement() {
        // p | T: each output row is a copy of some input row
        let x = noisy(2, 24, 2, 8);
        let pair = split_time(&x, 16).unwrap();
        let cfg = TpsConfig::new(4, 1, 1.0)
            .with_seed(11)
            .with_variant(Variant::NonOverlapping);
        let out = tps_variant(&pair, &cfg).unwrap().concat();
        for b in 0..2 {
            let mut before: Vec<u64> = x.sample(b).iter().map(|v| v.to_bits()).collect();
            let mut after: Vec<u64> = out.sample(b).iter().map(|v| v.to_bits()).collect();
            before.sort_unstable();
            after.sort_unstable();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn classification_requires_sample_level() {
        let x = noisy(2, 20, 1, 5);
        let cfg = TpsConfig::new(4, 2, 1.0);
        assert!(tps_classification(&x, &cfg).is_err());
        assert!(tps_classification(&x, &cfg.with_level(Level::Sample)).is_ok());
    }

    #[test]
    fn classification_is_order_equivariant() {
        let x = noisy(5, 30, 2, 6);
        let cfg = TpsConfig::new(5, 2, 1.0).with_seed(4).with_level(Level::Sample);
        let out = tps_classification(&x, &cfg).unwrap();
        let order = [3, 0, 4, 1, 2];
        let permuted = tps_classification(&x.select(&order).unwrap(), &cfg).unwrap();
        assert_eq!(permuted, out.select(&order).unwrap());

        let keys = [10u64, 11, 12, 13, 14];
        let keyed = tps_classification_keyed(&x, &cfg, &keys).unwrap();
        let pk: Vec<u64> = order.iter().map(|&i| keys[i]).collect();
        let keyed_perm = tps_classification_keyed(&x.select(&order).unwrap(), &cfg, &pk).unwrap();
        assert_eq!(keyed_perm, keyed.select(&order).unwrap());
    }

    #[test]
    fn content_key_is_value_sensitive() {
        assert_eq!(content_key(&[1.0, 2.0]), content_key(&[1.0, 2.0]));
        assert_ne!(content_key(&[1.0, 2.0]), content_key(&[2.0, 1.0]));
        assert_ne!(content_key(&[0.0]), content_key(&[-0.0]));
    }
}

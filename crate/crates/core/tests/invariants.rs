//! Structural properties of the augmentation pipeline.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tps_core::augment::{
    apply_shuffle, augment_batch, frequency_shuffle_planned, plan_shuffle, select_lowest,
    tps_classification, tps_classification_keyed, tps_forecasting, tps_variant, ElementPlan,
    PatchScores, ShufflePlan,
};
use tps_core::rng::permutation;
use tps_core::{
    merge_batches, reconstruct, split_time, unfold, Level, Method, RngStream, SeriesBatch,
    TpsConfig, Variant,
};

fn batch_from(seed: u64, b: usize, t: usize, c: usize) -> SeriesBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SeriesBatch::from_fn(b, t, c, |_, _, _| rng.random_range(-10.0..10.0)).unwrap()
}

fn close(a: &SeriesBatch, b: &SeriesBatch, tol: f64) -> bool {
    let scale = a.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.shape() == b.shape()
        && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// `(b, t, c, p, s)` with every index covered.
fn covered_geometry() -> impl Strategy<Value = (usize, usize, usize, usize, usize)> {
    (1usize..=4, 1usize..=128, 1usize..=8)
        .prop_flat_map(|(b, t, c)| (Just(b), Just(t), Just(c), 1..=t))
        .prop_flat_map(|(b, t, c, p)| (Just(b), Just(t), Just(c), Just(p), 1..=p))
        .prop_filter("last index covered", |&(_, t, _, p, s)| (t - p) % s == 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unfold_then_reconstruct_is_identity((b, t, c, p, s) in covered_geometry(), seed in any::<u64>()) {
        let x = batch_from(seed, b, t, c);
        let back = reconstruct(&unfold(&x, p, s).unwrap(), None).unwrap();
        prop_assert!(close(&back, &x, 1e-12));
    }

    #[test]
    fn shuffle_preserves_patch_multiset(
        b in 1usize..4, t in 4usize..40, c in 1usize..4, seed in any::<u64>(), alpha in 0.05f64..=1.0,
    ) {
        let x = batch_from(seed, b, t, c);
        let p = 2 + (seed as usize % (t.min(8) - 1));
        let patches = unfold(&x, p, 1 + (seed as usize / 7) % 3).unwrap();
        let scores = patch_variance_or_random(&patches, seed);
        let plan = plan_shuffle(&scores, alpha, RngStream::new(seed)).unwrap();
        let out = apply_shuffle(&patches, &plan).unwrap();
        for bi in 0..b {
            let bits = |t: &tps_core::PatchTensor| {
                let mut v: Vec<Vec<u64>> = (0..t.num_patches())
                    .map(|i| t.patch(bi, i).iter().map(|x| x.to_bits()).collect())
                    .collect();
                v.sort();
                v
            };
            prop_assert_eq!(bits(&patches), bits(&out));
        }
    }

    #[test]
    fn degenerate_rate_is_identity(
        b in 1usize..4, t in 2usize..30, h in 1usize..20, c in 1usize..4, seed in any::<u64>(),
    ) {
        let x = batch_from(seed, b, t + h, c);
        let p = 2 + seed as usize % (t + h - 1);
        let s = 1 + (seed as usize >> 8) % 4;
        let n = (t + h - p) / s + 1;
        // largest rate that still floors to one shuffled patch
        let alpha = (1.99 / n as f64).min(1.0);
        prop_assume!((alpha * n as f64).floor() <= 1.0);
        let pair = split_time(&x, t).unwrap();
        let out = tps_forecasting(&pair, &TpsConfig::new(p, s, alpha).with_seed(seed)).unwrap();
        prop_assert!(close(&out.concat(), &x, 1e-12));
    }

    #[test]
    fn classification_is_order_equivariant(
        b in 2usize..6, t in 4usize..40, c in 1usize..3, seed in any::<u64>(),
    ) {
        let x = batch_from(seed, b, t, c);
        let cfg = TpsConfig::new(2 + seed as usize % (t - 1), 1, 1.0)
            .with_seed(seed ^ 0xabc)
            .with_level(Level::Sample);
        let out = tps_classification(&x, &cfg).unwrap();
        let mut order: Vec<usize> = (0..b).collect();
        order.rotate_left(1 + seed as usize % (b - 1));
        order.swap(0, b - 1);
        let permuted = tps_classification(&x.select(&order).unwrap(), &cfg).unwrap();
        prop_assert_eq!(permuted, out.select(&order).unwrap());

        let keys: Vec<u64> = (0..b as u64).map(|k| k * 31 + 7).collect();
        let keyed = tps_classification_keyed(&x, &cfg, &keys).unwrap();
        let permuted_keys: Vec<u64> = order.iter().map(|&i| keys[i]).collect();
        let keyed_perm = tps_classification_keyed(&x.select(&order).unwrap(), &cfg, &permuted_keys).unwrap();
        prop_assert_eq!(keyed_perm, keyed.select(&order).unwrap());
    }
}

fn patch_variance_or_random(patches: &tps_core::PatchTensor, seed: u64) -> PatchScores {
    if seed.is_multiple_of(2) {
        tps_core::augment::patch_variance(patches).unwrap()
    } else {
        // integer scores force ties
        let n = patches.num_patches();
        let vals = (0..patches.batch() * n).map(|i| ((i as u64 ^ seed) % 3) as f64).collect();
        PatchScores::from_raw(vals, patches.batch(), n).unwrap()
    }
}

#[test]
fn permutations_are_uniform() {
    // 24 permutations of 4 slots; each count should sit within 5σ of its mean
    let draws = 48_000usize;
    let mut counts = std::collections::HashMap::new();
    let root = RngStream::new(2024);
    for k in 0..draws as u64 {
        *counts.entry(permutation(4, &mut root.derive(k).rng())).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 24);
    let p = 1.0 / 24.0;
    let mean = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for (perm, &n) in &counts {
        assert!((n as f64 - mean).abs() < 5.0 * sigma, "{perm:?}: {n} vs {mean}");
    }
}

#[test]
fn slot_occupancy_is_uniform() {
    // each selected slot receives each source patch equally often
    let x = batch_from(3, 1, 20, 2);
    let patches = unfold(&x, 4, 4).unwrap();
    let scores = tps_core::augment::patch_variance(&patches).unwrap();
    let n = 5;
    let trials = 20_000;
    let mut hits = vec![vec![0usize; n]; n];
    for k in 0..trials {
        let plan = plan_shuffle(&scores, 1.0, RngStream::new(k)).unwrap();
        let e = &plan.elements()[0];
        for (slot, &from) in e.permutation.iter().enumerate() {
            hits[slot][from] += 1;
        }
    }
    let p = 1.0 / n as f64;
    let mean = trials as f64 * p;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    for row in &hits {
        for &h in row {
            assert!((h as f64 - mean).abs() < 5.0 * sigma, "{hits:?}");
        }
    }
}

#[test]
fn elements_are_independent_of_batch_neighbours() {
    // element b depends only on its own values and index
    let x = batch_from(9, 3, 48, 2);
    let pair = split_time(&x, 32).unwrap();
    let cfg = TpsConfig::new(8, 2, 1.0).with_seed(77);
    let full = tps_forecasting(&pair, &cfg).unwrap();
    let mut other = batch_from(10, 3, 48, 2).into_vec();
    let size = 48 * 2;
    other[..size].copy_from_slice(&x.as_slice()[..size]);
    let other = SeriesBatch::new(other, 3, 48, 2).unwrap();
    let half = tps_forecasting(&split_time(&other, 32).unwrap(), &cfg).unwrap();
    assert_eq!(full.concat().sample(0), half.concat().sample(0));
    assert_ne!(full.concat().sample(1), half.concat().sample(1));
}

#[test]
fn input_only_leaves_horizon_untouched() {
    let x = batch_from(1, 2, 40, 3);
    let pair = split_time(&x, 24).unwrap();
    let cfg = TpsConfig::new(6, 2, 1.0).with_seed(5).with_variant(Variant::InputOnly);
    let out = tps_variant(&pair, &cfg).unwrap();
    assert_eq!(out.horizon(), pair.horizon());
    assert_ne!(out.lookback(), pair.lookback());
}

#[test]
fn frequency_variant_with_identity_plan_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..100u64 {
        let (b, t, c) = (rng.random_range(1..4), rng.random_range(4..80), rng.random_range(1..4));
        let x = batch_from(trial, b, t, c);
        let bins = t / 2 + 1;
        let p = rng.random_range(1..=bins.min(8));
        let s = rng.random_range(1..=p);
        let cfg = TpsConfig::new(p, s, 1.0).with_variant(Variant::FrequencyDomain);
        let out = frequency_shuffle_planned(&x, &cfg, |scores| {
            let elements = (0..scores.batch())
                .map(|bi| {
                    let selected = select_lowest(scores.row(bi), scores.n_patches());
                    let permutation = (0..selected.len()).collect();
                    ElementPlan { selected, permutation }
                })
                .collect();
            ShufflePlan::new(scores.n_patches(), elements)
        })
        .unwrap();
        assert!(close(&out, &x, 1e-9), "trial {trial}");
    }
}

#[test]
fn augment_batch_puts_originals_first() {
    let x = batch_from(4, 4, 30, 2);
    let pair = split_time(&x, 20).unwrap();
    let method = Method::Tps(TpsConfig::new(5, 1, 1.0));
    let out = augment_batch(&pair, &method, 2, 0.5, RngStream::new(1)).unwrap();
    assert_eq!(out.batch(), 4 + 2 * 2);
    assert_eq!(out.select(&[0, 1, 2, 3]).unwrap(), pair);
    let empty = merge_batches(&pair, &pair.select(&[]).unwrap()).unwrap();
    assert_eq!(empty, pair);
}

#[test]
fn runs_are_reproducible() {
    let x = batch_from(8, 5, 64, 3);
    let pair = split_time(&x, 48).unwrap();
    for variant in Variant::ALL {
        let cfg = TpsConfig::new(8, 2, 0.8).with_seed(31).with_variant(variant);
        let run = || tps_core::augment::tps_forecasting_with(&pair, &cfg, RngStream::new(31)).unwrap();
        assert_eq!(run(), run(), "{}", variant.name());
    }
}

//! Self-verification: each check compares tps-core with a brute-force
//! reference or an exact property on freshly drawn random instances.
//!
//! Output is a function of the seed only, so two runs print the same log.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tps_core::augment::{
    apply_shuffle, augment_batch, frequency_shuffle_planned, patch_variance, plan_shuffle,
    select_lowest, tps_classification, tps_forecasting, ElementPlan, PatchScores, ShufflePlan,
};
use tps_core::metrics::{crps, dtw, ks_statistic, mae, pi80, pinball, wasserstein1, QuantileSet};
use tps_core::rng::{mix64, permutation};
use tps_core::{
    coverage, reconstruct, split_time, unfold, Level, Method, PatchGeometry, PatchTensor,
    RngStream, SeriesBatch, TpsConfig, Variant,
};

use crate::args::Fault;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failures: Vec<String>, summary: String) -> Self {
        match failures.first() {
            None => Check {
                name,
                passed: true,
                detail: summary,
            },
            Some(first) => Check {
                name,
                passed: false,
                detail: format!("{} failure(s); first: {first}", failures.len()),
            },
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

type CheckFn = fn(u64, Option<Fault>) -> Check;

/// Every check in the order `tps selftest` runs them.
pub const ALL: [(&str, CheckFn); 15] = [
    ("round-trip", round_trip),
    ("hand-example", hand_example),
    ("coverage", coverage_exhaustive),
    ("variance", variance_oracle),
    ("selection", selection_oracle),
    ("multiset", multiset_preservation),
    ("degeneracy", degeneracy),
    ("pipeline", pipeline_oracle),
    ("ks-wasserstein", ks_wasserstein_oracle),
    ("dtw", dtw_exhaustive),
    ("quantile-metrics", quantile_metrics),
    ("uniformity", shuffle_uniformity),
    ("frequency-round-trip", frequency_round_trip),
    ("classification-equivariance", classification_equivariance),
    ("thread-invariance", thread_invariance),
];

pub fn run_all(seed: u64, fault: Option<Fault>) -> Vec<Check> {
    ALL.iter().map(|(_, f)| f(seed, fault)).collect()
}

fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    let tag = name.bytes().fold(0u64, |h, b| mix64(h ^ u64::from(b)));
    ChaCha8Rng::seed_from_u64(mix64(seed ^ tag))
}

fn random_batch(rng: &mut ChaCha8Rng, b: usize, t: usize, c: usize) -> SeriesBatch {
    let scale = 10f64.powi(rng.random_range(-2..4));
    SeriesBatch::from_fn(b, t, c, |_, _, _| scale * rng.random_range(-1.0..1.0)).expect("finite")
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `reconstruct(unfold(x)) == x` on fully covered geometries.
pub fn round_trip(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "round-trip");
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let (b, t, c) = (rng.random_range(1..=4), rng.random_range(1..=128), rng.random_range(1..=8));
        let p = rng.random_range(1..=t);
        // strides that divide t − p leave no index uncovered
        let strides: Vec<usize> = (1..=p).filter(|s| (t - p) % s == 0).collect();
        let s = strides[rng.random_range(0..strides.len())];
        let x = random_batch(&mut rng, b, t, c);
        let back = match unfold(&x, p, s).and_then(|u| reconstruct(&u, None)) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let err = max_diff(back.as_slice(), x.as_slice()) / max_abs(x.as_slice()).max(1.0);
        worst = worst.max(err);
        if err > 1e-12 {
            failures.push(format!("trial {trial} (B={b} T={t} C={c} p={p} s={s}): relative error {err:e}"));
        }
    }
    Check::new("round-trip", failures, format!("200 geometries, max relative error {worst:.1e}"))
}

/// The worked reconstruction: middle patch replaced by `[10, 11]`.
pub fn hand_example(_: u64, _: Option<Fault>) -> Check {
    let want = [0.0, 5.5, 6.5, 3.0];
    let got = PatchGeometry::new(4, 2, 1)
        .and_then(|g| PatchTensor::from_raw(vec![0.0, 1.0, 10.0, 11.0, 2.0, 3.0], 1, 1, g))
        .and_then(|p| reconstruct(&p, None));
    let failures = match &got {
        Ok(s) if max_diff(s.as_slice(), &want) <= 1e-12 => vec![],
        Ok(s) => vec![format!("got {:?}", s.as_slice())],
        Err(e) => vec![e.to_string()],
    };
    Check::new("hand-example", failures, "T=4 p=2 s=1 -> [0, 5.5, 6.5, 3]".into())
}

/// Every `(T, p, s)` with `T ≤ 64`, `p ≤ T`, `s ≤ 16`.
pub fn coverage_exhaustive(_: u64, _: Option<Fault>) -> Check {
    let mut failures = Vec::new();
    let mut count = 0;
    for t in 1..=64 {
        for p in 1..=t {
            for s in 1..=16 {
                count += 1;
                let want = tps_oracle::coverage(t, p, s);
                match coverage(t, p, s) {
                    Ok(got) if got.counts() == want.as_slice() => {}
                    Ok(got) => failures.push(format!("T={t} p={p} s={s}: {:?} vs {want:?}", got.counts())),
                    Err(e) => failures.push(format!("T={t} p={p} s={s}: {e}")),
                }
            }
        }
    }
    Check::new("coverage", failures, format!("{count} geometries match the double loop"))
}

/// Patch variance against the two-pass formula.
pub fn variance_oracle(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "variance");
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut patches_seen = 0;
    while patches_seen < 1000 {
        let (c, p) = (rng.random_range(1..=4), rng.random_range(2..=16));
        let t = p + rng.random_range(0..8);
        let x = random_batch(&mut rng, 1, t, c);
        let tensor = unfold(&x, p, 1).expect("p <= t");
        let scores = patch_variance(&tensor).expect("C·p >= 2");
        for i in 0..tensor.num_patches().min(1000 - patches_seen) {
            let want = tps_oracle::variance_two_pass(tensor.patch(0, i));
            let got = scores.row(0)[i];
            let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            if rel > 1e-12 {
                failures.push(format!("patch {patches_seen}: {got} vs {want}"));
            }
            patches_seen += 1;
        }
    }
    Check::new("variance", failures, format!("{patches_seen} patches, max relative error {worst:.1e}"))
}

/// Indices chosen by [`plan_shuffle`], or by a deliberately broken rule.
fn selection_under_test(scores: &[f64], alpha: f64, fault: Option<Fault>) -> Vec<usize> {
    match fault {
        Some(Fault::TieBreak) => {
            let k = (alpha * scores.len() as f64).floor() as usize;
            let mut idx: Vec<usize> = (0..scores.len()).collect();
            idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)));
            idx.truncate(k);
            idx
        }
        None => {
            let s = PatchScores::from_raw(scores.to_vec(), 1, scores.len()).expect("one row");
            plan_shuffle(&s, alpha, RngStream::new(0))
                .map(|plan| plan.elements()[0].selected.clone())
                .unwrap_or_default()
        }
    }
}

/// Lowest-score selection, ties to the lower index, against a
/// lexicographic-minimum oracle.
pub fn selection_oracle(seed: u64, fault: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "selection");
    let mut failures = Vec::new();
    let mut cases: Vec<(Vec<f64>, f64)> = vec![(vec![3.0, 1.0, 2.0, 1.0], 0.75)];
    for _ in 0..500 {
        let n = rng.random_range(1..=24);
        let levels = rng.random_range(1..=4);
        let scores = (0..n).map(|_| f64::from(rng.random_range(0..levels))).collect();
        cases.push((scores, [0.2, 0.5, 0.7, 0.8, 0.9, 1.0][rng.random_range(0..6)]));
    }
    for (scores, alpha) in &cases {
        let k = (alpha * scores.len() as f64).floor() as usize;
        let want = tps_oracle::lowest_k(scores, k);
        let got = selection_under_test(scores, *alpha, fault);
        if got != want {
            failures.push(format!("scores {scores:?} alpha {alpha}: {got:?} vs {want:?}"));
        }
    }
    if fault.is_none() && select_lowest(&[3.0, 1.0, 2.0, 1.0], 3) != [1, 3, 2] {
        failures.push("select_lowest([3,1,2,1], 3) != [1,3,2]".into());
    }
    Check::new("selection", failures, format!("{} score vectors incl. ties", cases.len()))
}

/// Shuffling only moves patches: each element's patch multiset is unchanged bit for bit.
pub fn multiset_preservation(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "multiset");
    let mut failures = Vec::new();
    for trial in 0..200u64 {
        let (b, c) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let p = rng.random_range(2..=12);
        let t = p + rng.random_range(0..40);
        let s = rng.random_range(1..=p);
        let alpha = rng.random_range(0.05..=1.0);
        let x = random_batch(&mut rng, b, t, c);
        let patches = unfold(&x, p, s).expect("p <= t");
        let out = patch_variance(&patches)
            .and_then(|sc| plan_shuffle(&sc, alpha, RngStream::new(trial)))
            .and_then(|plan| apply_shuffle(&patches, &plan));
        let out = match out {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        for bi in 0..b {
            let bits = |t: &PatchTensor| {
                let mut v: Vec<Vec<u64>> = (0..t.num_patches())
                    .map(|i| t.patch(bi, i).iter().map(|x| x.to_bits()).collect())
                    .collect();
                v.sort_unstable();
                v
            };
            if bits(&patches) != bits(&out) {
                failures.push(format!("trial {trial} element {bi}: multiset changed"));
            }
        }
    }
    Check::new("multiset", failures, "200 plans".into())
}

/// A shuffle rate selecting at most one patch leaves the series unchanged.
pub fn degeneracy(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "degeneracy");
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let (b, c) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let (t, h) = (rng.random_range(2..=48), rng.random_range(1..=48));
        let p = rng.random_range(2..=(t + h));
        let s = rng.random_range(1..=p);
        let n = (t + h - p) / s + 1;
        let alpha = rng.random_range(0.0..2.0 / n as f64).clamp(f64::MIN_POSITIVE, 1.0);
        if (alpha * n as f64).floor() > 1.0 {
            continue;
        }
        let x = random_batch(&mut rng, b, t + h, c);
        let pair = split_time(&x, t).expect("1 <= t < T");
        match tps_forecasting(&pair, &TpsConfig::new(p, s, alpha).with_seed(trial)) {
            Ok(out) => {
                let err = max_diff(out.concat().as_slice(), x.as_slice()) / max_abs(x.as_slice()).max(1.0);
                if err > 1e-12 {
                    failures.push(format!("trial {trial}: relative error {err:e}"));
                }
            }
            Err(e) => failures.push(format!("trial {trial}: {e}")),
        }
    }
    Check::new("degeneracy", failures, "100 instances with N_s <= 1".into())
}

/// The full forecasting pipeline against a loop-based reference driven by
/// the same permutations.
pub fn pipeline_oracle(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "pipeline");
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let (b, c) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let (t, h) = (rng.random_range(2..=48), rng.random_range(1..=24));
        let p = rng.random_range(2..=(t + h).min(16));
        let s = rng.random_range(1..=p);
        let alpha = [0.2, 0.5, 0.7, 0.8, 0.9, 1.0][rng.random_range(0..6)];
        let x = random_batch(&mut rng, b, t + h, c);
        let pair = split_time(&x, t).expect("1 <= t < T");
        let cfg = TpsConfig::new(p, s, alpha).with_seed(seed ^ trial);
        let got = match tps_forecasting(&pair, &cfg) {
            Ok(g) => g.concat(),
            Err(e) => {
                failures.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let n = (t + h - p) / s + 1;
        let k = (alpha * n as f64).floor() as usize;
        let root = RngStream::new(cfg.seed);
        let perms: Vec<Vec<usize>> = (0..b as u64).map(|e| permutation(k, &mut root.derive(e).rng())).collect();
        let want = tps_oracle::tps(x.as_slice(), b, t + h, c, p, s, alpha, &perms);
        let err = max_diff(got.as_slice(), &want) / max_abs(&want).max(1.0);
        if err > 1e-12 {
            failures.push(format!("trial {trial}: relative error {err:e}"));
        }
    }
    Check::new("pipeline", failures, "100 forecasting runs match the reference loop".into())
}

/// KS and Wasserstein-1 against brute-force ECDF and quantile integration.
pub fn ks_wasserstein_oracle(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "ks-wasserstein");
    let mut failures = Vec::new();
    for trial in 0..500 {
        let (n, m) = (rng.random_range(1..=32), rng.random_range(1..=32));
        // a coarse grid half the time so cross-sample ties occur
        let coarse = trial % 2 == 0;
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if coarse {
                        f64::from(rng.random_range(-6i32..6)) * 0.5
                    } else {
                        rng.random_range(-3.0..3.0)
                    }
                })
                .collect()
        };
        let (a, b) = (draw(n), draw(m));
        let ks = ks_statistic(&a, &b).map(|v| (v, tps_oracle::ks(&a, &b)));
        let w = wasserstein1(&a, &b).map(|v| (v, tps_oracle::wasserstein1(&a, &b)));
        for (what, r) in [("ks", ks), ("wasserstein", w)] {
            match r {
                Ok((got, want)) if (got - want).abs() <= 1e-9 => {}
                Ok((got, want)) => failures.push(format!("trial {trial} {what}: {got} vs {want}")),
                Err(e) => failures.push(format!("trial {trial} {what}: {e}")),
            }
        }
    }
    Check::new("ks-wasserstein", failures, "500 sample pairs, n <= 32".into())
}

/// DTW against exhaustive path enumeration on every pair of sequences of
/// length at most 6 over {0, 1, 2}.
pub fn dtw_exhaustive(_: u64, _: Option<Fault>) -> Check {
    let seqs = tps_oracle::all_sequences(&[0.0, 1.0, 2.0], 6);
    let failures: Vec<String> = seqs
        .par_iter()
        .flat_map_iter(|a| {
            seqs.iter().filter_map(move |b| {
                let want = tps_oracle::dtw_exhaustive(a, b);
                match dtw(a, b) {
                    Ok(got) if got == want => None,
                    Ok(got) => Some(format!("{a:?} vs {b:?}: {got} vs {want}")),
                    Err(e) => Some(format!("{a:?} vs {b:?}: {e}")),
                }
            })
        })
        .collect();
    let pairs = seqs.len() * seqs.len();
    Check::new("dtw", failures, format!("{pairs} sequence pairs"))
}

/// Pinball at the median is half the MAE, CRPS is twice the pinball loss,
/// the nine-level pinball matches a loop and PI-80 matches a counting loop.
pub fn quantile_metrics(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "quantile-metrics");
    let mut failures = Vec::new();
    let levels = QuantileSet::default();
    let median = QuantileSet::new(vec![0.5]).expect("valid");
    for trial in 0..200 {
        let (b, t, c) = (rng.random_range(1..=3), rng.random_range(1..=24), rng.random_range(1..=3));
        let y = random_batch(&mut rng, b, t, c);
        let q = random_batch(&mut rng, b, t, c);
        let half_mae = 0.5 * mae(&y, &q).expect("same shape");
        let pin = pinball(&y, std::slice::from_ref(&q), &median).expect("same shape");
        if (pin - half_mae).abs() > 1e-12 * half_mae.max(1.0) {
            failures.push(format!("trial {trial}: pinball(0.5) {pin} vs mae/2 {half_mae}"));
        }
        let preds: Vec<SeriesBatch> = (0..9).map(|_| random_batch(&mut rng, b, t, c)).collect();
        let raw: Vec<Vec<f64>> = preds.iter().map(|p| p.as_slice().to_vec()).collect();
        let pin = pinball(&y, &preds, &levels).expect("nine levels");
        let want = tps_oracle::pinball(y.as_slice(), &raw, levels.levels());
        if (pin - want).abs() > 1e-12 * want.max(1.0) {
            failures.push(format!("trial {trial}: pinball {pin} vs {want}"));
        }
        if crps(&y, &preds, &levels).expect("nine levels") != 2.0 * pin {
            failures.push(format!("trial {trial}: crps != 2 * pinball"));
        }
        let stats = pi80(&y, &preds[1], &preds[7]).expect("same shape");
        let (cov, width) = tps_oracle::interval(y.as_slice(), &raw[1], &raw[7]);
        if stats.coverage != cov || (stats.width - width).abs() > 1e-12 * width.abs().max(1.0) {
            failures.push(format!("trial {trial}: pi80 {stats:?} vs ({cov}, {width})"));
        }
    }
    Check::new("quantile-metrics", failures, "200 instances".into())
}

/// Every permutation of 4 slots appears within 5σ of its expected count.
pub fn shuffle_uniformity(seed: u64, _: Option<Fault>) -> Check {
    let draws = 24_000u64;
    let mut counts = std::collections::BTreeMap::new();
    let root = RngStream::new(seed).derive(0x5eed);
    for k in 0..draws {
        *counts.entry(permutation(4, &mut root.derive(k).rng())).or_insert(0u64) += 1;
    }
    let p = 1.0 / 24.0;
    let mean = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    let mut failures = Vec::new();
    if counts.len() != 24 {
        failures.push(format!("only {} of 24 permutations drawn", counts.len()));
    }
    let mut worst = 0.0f64;
    for (perm, &n) in &counts {
        let z = (n as f64 - mean).abs() / sigma;
        worst = worst.max(z);
        if z >= 5.0 {
            failures.push(format!("{perm:?} drawn {n} times, expected {mean:.0}"));
        }
    }
    Check::new("uniformity", failures, format!("{draws} draws, max |z| {worst:.2}"))
}

/// The frequency-domain variant with an identity permutation returns its input.
pub fn frequency_round_trip(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "frequency-round-trip");
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let (b, t, c) = (rng.random_range(1..=4), rng.random_range(4..=128), rng.random_range(1..=4));
        let bins = t / 2 + 1;
        let p = rng.random_range(1..=bins.min(16));
        let s = rng.random_range(1..=p);
        let x = random_batch(&mut rng, b, t, c);
        let cfg = TpsConfig::new(p, s, 1.0).with_variant(Variant::FrequencyDomain);
        let out = frequency_shuffle_planned(&x, &cfg, |scores| {
            let elements = (0..scores.batch())
                .map(|e| {
                    let selected = select_lowest(scores.row(e), scores.n_patches());
                    let permutation = (0..selected.len()).collect();
                    ElementPlan { selected, permutation }
                })
                .collect();
            ShufflePlan::new(scores.n_patches(), elements)
        });
        match out {
            Ok(out) => {
                let err = max_diff(out.as_slice(), x.as_slice()) / max_abs(x.as_slice()).max(1.0);
                worst = worst.max(err);
                if err > 1e-9 {
                    failures.push(format!("trial {trial}: relative error {err:e}"));
                }
            }
            Err(e) => failures.push(format!("trial {trial}: {e}")),
        }
    }
    Check::new("frequency-round-trip", failures, format!("100 instances, max relative error {worst:.1e}"))
}

/// Permuting the samples of a classification batch permutes the outputs.
pub fn classification_equivariance(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "classification-equivariance");
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let (b, t, c) = (rng.random_range(2..=8), rng.random_range(4..=64), rng.random_range(1..=4));
        let p = rng.random_range(2..=t.min(16));
        let s = rng.random_range(1..=p);
        let alpha = rng.random_range(0.3..=1.0);
        let x = random_batch(&mut rng, b, t, c);
        let order = permutation(b, &mut rng);
        let cfg = TpsConfig::new(p, s, alpha).with_seed(trial).with_level(Level::Sample);
        let result = tps_classification(&x, &cfg).and_then(|out| {
            let permuted = tps_classification(&x.select(&order)?, &cfg)?;
            Ok(permuted == out.select(&order)?)
        });
        match result {
            Ok(true) => {}
            Ok(false) => failures.push(format!("trial {trial}: outputs not permuted with inputs")),
            Err(e) => failures.push(format!("trial {trial}: {e}")),
        }
    }
    Check::new("classification-equivariance", failures, "100 trials".into())
}

/// Augmenting the same batches under 1, 4 and 8 worker threads gives
/// bit-identical results.
pub fn thread_invariance(seed: u64, _: Option<Fault>) -> Check {
    let mut rng = rng_for(seed, "thread-invariance");
    let x = random_batch(&mut rng, 16, 96, 3);
    let pair = split_time(&x, 64).expect("1 <= t < T");
    let method = Method::Tps(TpsConfig::new(12, 3, 0.8).with_seed(seed));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(|| augment_batch(&pair, &method, 2, 0.5, RngStream::new(seed)))
    };
    let base = run(1);
    let failures = [4, 8]
        .into_iter()
        .filter(|&n| run(n).ok() != base.as_ref().ok().cloned())
        .map(|n| format!("{n} threads differ from 1 thread"))
        .collect();
    Check::new("thread-invariance", failures, "1, 4 and 8 threads agree".into())
}

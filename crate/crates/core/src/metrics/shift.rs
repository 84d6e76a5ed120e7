use crate::error::{Result, TpsError};
use crate::par;
use crate::series::SeriesBatch;

use super::point::check_same_shape;
use super::report::{Aggregation, MetricsReport};

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(TpsError::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Walks the merged support of two sorted samples, calling
/// `visit(x, F_a(x), F_b(x))` once per distinct value.
fn merged_ecdf(a: &[f64], b: &[f64], mut visit: impl FnMut(f64, f64, f64)) {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        visit(x, i as f64 / n, j as f64 / m);
    }
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let mut d = 0.0f64;
    merged_ecdf(&a, &b, |_, fa, fb| d = d.max((fa - fb).abs()));
    Ok(d)
}

/// One-dimensional Wasserstein-1 distance `∫ |F_a − F_b| dx`.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    if a.len() == b.len() {
        let sum: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(sum / a.len() as f64);
    }
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    merged_ecdf(&a, &b, |x, fa, fb| {
        if let Some((px, gap)) = prev {
            total += gap * (x - px);
        }
        prev = Some((x, (fa - fb).abs()));
    });
    Ok(total)
}

/// Unconstrained DTW with `|a_i − b_j|` local cost and steps
/// `(1,0)`, `(0,1)`, `(1,1)`.
pub fn dtw(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(TpsError::EmptySample);
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &x in a {
        curr[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = (x - b[j - 1]).abs() + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// Average KS and Wasserstein-1 per channel over flattened `(b, τ)` values,
/// and average DTW over every `(b, c)` sequence pair.
pub fn distribution_shift_report(original: &SeriesBatch, augmented: &SeriesBatch) -> Result<MetricsReport> {
    check_same_shape(original, augmented)?;
    let [batch, _, channels] = original.shape();
    let per_channel = par::map_range(channels, |c| -> Result<(f64, f64)> {
        let a = original.channel_values(c);
        let b = augmented.channel_values(c);
        Ok((ks_statistic(&a, &b)?, wasserstein1(&a, &b)?))
    });
    let (mut ks, mut w1) = (0.0, 0.0);
    for r in per_channel {
        let (k, w) = r?;
        ks += k;
        w1 += w;
    }
    let pairs = par::map_range(batch * channels, |k| {
        let (b, c) = (k / channels, k % channels);
        dtw(&original.channel_series(b, c), &augmented.channel_series(b, c))
    });
    let mut dtw_sum = 0.0;
    for d in pairs {
        dtw_sum += d?;
    }
    let mut report = MetricsReport::default();
    report.push("avg_ks", ks / channels as f64, Aggregation::ChannelMean)?;
    report.push("avg_wasserstein", w1 / channels as f64, Aggregation::ChannelMean)?;
    report.push(
        "avg_dtw",
        dtw_sum / (batch * channels) as f64,
        Aggregation::SampleChannelMean,
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[3.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0, 1.0], &[0.5]).unwrap(), 0.5);
        assert!(matches!(ks_statistic(&[], &[1.0]), Err(TpsError::EmptySample)));
    }

    #[test]
    fn ks_handles_ties_across_samples() {
        // F_a jumps to 1 at 1, F_b to 0.5 at 1
        assert_eq!(ks_statistic(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), 0.5);
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein1(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(wasserstein1(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), 0.0);
        // unequal sizes: F_a = 1 on [0, ∞), F_b = 0.5 on [0, 2)
        assert!((wasserstein1(&[0.0], &[0.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(wasserstein1(&[0.0], &[]).is_err());
    }

    #[test]
    fn dtw_examples() {
        assert_eq!(dtw(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(dtw(&[0.0, 0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(dtw(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(dtw(&[0.0, 1.0, 1.0, 2.0], &[0.0, 2.0]).unwrap(), 2.0);
        assert!(dtw(&[], &[1.0]).is_err());
    }

    #[test]
    fn identical_batches_report_zero() {
        let x = SeriesBatch::from_fn(3, 12, 2, |b, t, c| ((b + t * c) % 5) as f64).unwrap();
        let r = distribution_shift_report(&x, &x).unwrap();
        for m in &r.metrics {
            assert_eq!(m.value, 0.0, "{}", m.name);
        }
    }

    #[test]
    fn single_sequence_report_matches_base_metrics() {
        let a = SeriesBatch::new(vec![0.0, 1.0, 3.0, 2.0], 1, 4, 1).unwrap();
        let b = SeriesBatch::new(vec![1.0, 1.0, 2.0, 5.0], 1, 4, 1).unwrap();
        let r = distribution_shift_report(&a, &b).unwrap();
        let (va, vb) = (a.as_slice(), b.as_slice());
        assert_eq!(r.get("avg_ks"), Some(ks_statistic(va, vb).unwrap()));
        assert_eq!(r.get("avg_wasserstein"), Some(wasserstein1(va, vb).unwrap()));
        assert_eq!(r.get("avg_dtw"), Some(dtw(va, vb).unwrap()));
    }

    fn small() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec((-20i32..20).prop_map(|v| v as f64 * 0.5), 1..6)
    }

    proptest! {
        #[test]
        fn metrics_are_symmetric(a in small(), b in small()) {
            prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&b, &a).unwrap());
            let (w, wr) = (wasserstein1(&a, &b).unwrap(), wasserstein1(&b, &a).unwrap());
            prop_assert!((w - wr).abs() <= 1e-12);
            prop_assert_eq!(dtw(&a, &b).unwrap(), dtw(&b, &a).unwrap());
        }

        #[test]
        fn metrics_vanish_on_self(a in small()) {
            prop_assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(dtw(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn wasserstein_triangle(a in small(), b in small(), c in small()) {
            let ab = wasserstein1(&a, &b).unwrap();
            let bc = wasserstein1(&b, &c).unwrap();
            let ac = wasserstein1(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn non_negative(a in small(), b in small()) {
            prop_assert!(ks_statistic(&a, &b).unwrap() >= 0.0);
            prop_assert!(wasserstein1(&a, &b).unwrap() >= 0.0);
            prop_assert!(dtw(&a, &b).unwrap() >= 0.0);
        }
    }
}

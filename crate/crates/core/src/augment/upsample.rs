//! Upsample baseline: stretch a random consecutive segment back to full length.

use rand::Rng;

use crate::error::{Result, TpsError};
use crate::par;
use crate::rng::RngStream;
use crate::series::{split_time, SeriesBatch, SplitPair};

/// Resamples `segment` onto `len` evenly spaced points with linear
/// interpolation; the first and last outputs equal the segment endpoints.
pub fn interpolate_linear(segment: &[f64], len: usize) -> Result<Vec<f64>> {
    if segment.len() < 2 {
        return Err(TpsError::Interpolation(segment.len()));
    }
    if len == 1 {
        return Ok(vec![segment[0]]);
    }
    let last = segment.len() - 1;
    let step = last as f64 / (len - 1) as f64;
    Ok((0..len)
        .map(|k| {
            if k == len - 1 {
                return segment[last];
            }
            let pos = k as f64 * step;
            let lo = (pos.floor() as usize).min(last - 1);
            let frac = pos - lo as f64;
            segment[lo] + frac * (segment[lo + 1] - segment[lo])
        })
        .collect())
}

/// Segment length `ceil(rate · T)`, robust to representation error in `rate · T`.
fn segment_len(rate: f64, time: usize) -> usize {
    let raw = rate * time as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(time)
}

/// Stretches a uniformly placed segment of `ceil(segment_rate · T)` steps
/// of the joined series back to `T` steps, then splits at `t`.
///
/// Element `b` draws its segment start from `stream.derive(b)`; all channels
/// of an element share the segment.
pub fn upsample_baseline(pair: &SplitPair, segment_rate: f64, stream: RngStream) -> Result<SplitPair> {
    if !(segment_rate > 0.0 && segment_rate <= 1.0) {
        return Err(TpsError::Config(format!(
            "segment rate must lie in (0, 1], got {segment_rate}"
        )));
    }
    let x = pair.concat();
    let [batch, time, channels] = x.shape();
    let seg = segment_len(segment_rate, time);
    if seg < 2 {
        return Err(TpsError::Interpolation(seg));
    }
    let rows = par::map_range(batch, |b| -> Result<Vec<f64>> {
        let start = stream.derive(b as u64).rng().random_range(0..=(time - seg) as u64) as usize;
        let mut out = vec![0.0; time * channels];
        for c in 0..channels {
            let column: Vec<f64> = (start..start + seg).map(|t| x.get(b, t, c)).collect();
            for (t, v) in interpolate_linear(&column, time)?.into_iter().enumerate() {
                out[t * channels + c] = v;
            }
        }
        Ok(out)
    });
    let mut data = Vec::with_capacity(batch * time * channels);
    for row in rows {
        data.extend(row?);
    }
    split_time(
        &SeriesBatch::from_parts(data, batch, time, channels),
        pair.lookback_len(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint() {
        assert_eq!(interpolate_linear(&[0.0, 2.0], 3).unwrap(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn short_segment_rejected() {
        assert!(matches!(interpolate_linear(&[1.0], 4), Err(TpsError::Interpolation(1))));
        let x = SeriesBatch::from_fn(1, 10, 1, |_, t, _| t as f64).unwrap();
        let pair = split_time(&x, 5).unwrap();
        assert!(matches!(
            upsample_baseline(&pair, 0.1, RngStream::new(0)),
            Err(TpsError::Interpolation(1))
        ));
    }

    #[test]
    fn full_rate_is_identity() {
        let x = SeriesBatch::from_fn(3, 17, 2, |b, t, c| ((b + 1) * t * t) as f64 - c as f64)
            .unwrap();
        let pair = split_time(&x, 9).unwrap();
        assert_eq!(upsample_baseline(&pair, 1.0, RngStream::new(4)).unwrap(), pair);
    }

    #[test]
    fn segment_length_rounding() {
        assert_eq!(segment_len(0.7, 10), 7);
        assert_eq!(segment_len(0.5, 7), 4);
        assert_eq!(segment_len(1.0, 9), 9);
    }

    #[test]
    fn endpoints_match_a_segment() {
        let x = SeriesBatch::from_fn(4, 20, 1, |b, t, _| (b * 100 + t) as f64).unwrap();
        let pair = split_time(&x, 12).unwrap();
        let out = upsample_baseline(&pair, 0.5, RngStream::new(8)).unwrap().concat();
        for b in 0..4 {
            let first = out.get(b, 0, 0);
            let last = out.get(b, 19, 0);
            // a ramp segment of 10 steps starting at an integer offset
            assert_eq!(first.fract(), 0.0);
            assert_eq!(last - first, 9.0);
        }
    }
}

//! Batch containers and the shape algebra shared by every pipeline stage.
//!
//! Storage is row-major `[batch, time, channel]` with the channel axis
//! varying fastest, so `x[b, τ, :]` is a contiguous slice.

use crate::error::{Axis, Result, TpsError};

/// A batch of multivariate series, shape `[B, T, C]`.
///
/// `T` and `C` are always at least one. `B` may be zero, which is how an
/// empty synthetic batch (augmentation ratio 0) is represented.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBatch {
    data: Vec<f64>,
    batch: usize,
    time: usize,
    channels: usize,
}

impl SeriesBatch {
    pub fn new(data: Vec<f64>, batch: usize, time: usize, channels: usize) -> Result<Self> {
        if time == 0 || channels == 0 {
            return Err(TpsError::Config(format!(
                "series must have at least one time step and channel, got T={time}, C={channels}"
            )));
        }
        if data.len() != batch * time * channels {
            return Err(TpsError::Data(format!(
                "buffer of {} values does not match shape [{batch}, {time}, {channels}]",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let per_sample = time * channels;
            return Err(TpsError::Data(format!(
                "non-finite value {} at [{}, {}, {}]",
                data[pos],
                pos / per_sample,
                (pos % per_sample) / channels,
                pos % channels
            )));
        }
        Ok(Self {
            data,
            batch,
            time,
            channels,
        })
    }

    /// Builds a batch from a generator `f(b, τ, c)`.
    pub fn from_fn(
        batch: usize,
        time: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(batch * time * channels);
        for b in 0..batch {
            for t in 0..time {
                for c in 0..channels {
                    data.push(f(b, t, c));
                }
            }
        }
        Self::new(data, batch, time, channels)
    }

    pub fn empty(time: usize, channels: usize) -> Result<Self> {
        Self::new(Vec::new(), 0, time, channels)
    }

    /// Internal constructor for buffers produced by kernels that preserve
    /// finiteness and shape by construction.
    pub(crate) fn from_parts(data: Vec<f64>, batch: usize, time: usize, channels: usize) -> Self {
        debug_assert_eq!(data.len(), batch * time * channels);
        Self {
            data,
            batch,
            time,
            channels,
        }
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.batch, self.time, self.channels]
    }

    pub fn is_empty(&self) -> bool {
        self.batch == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, b: usize, t: usize, c: usize) -> f64 {
        self.data[(b * self.time + t) * self.channels + c]
    }

    /// The `[T, C]` block of sample `b`.
    pub fn sample(&self, b: usize) -> &[f64] {
        let len = self.time * self.channels;
        &self.data[b * len..(b + 1) * len]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.time * self.channels)
    }

    /// Copies out `x[b, :, c]`.
    pub fn channel_series(&self, b: usize, c: usize) -> Vec<f64> {
        self.sample(b)
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    /// All values of channel `c`, flattened across batch and time.
    pub fn channel_values(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.channels).copied().collect()
    }

    /// Gathers the samples at `indices` (in that order) into a new batch.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let len = self.time * self.channels;
        let mut data = Vec::with_capacity(indices.len() * len);
        for &b in indices {
            if b >= self.batch {
                return Err(TpsError::Bounds {
                    what: "batch index",
                    index: b,
                    valid: format!("0..{}", self.batch),
                });
            }
            data.extend_from_slice(self.sample(b));
        }
        Ok(Self::from_parts(data, indices.len(), self.time, self.channels))
    }

    /// Stacks batches along the batch axis.
    pub fn concat_batch(parts: &[&SeriesBatch]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| TpsError::Config("cannot stack zero batches".into()))?;
        let mut data = Vec::new();
        let mut batch = 0;
        for part in parts {
            ensure_axis(Axis::Time, first.time, part.time)?;
            ensure_axis(Axis::Channel, first.channels, part.channels)?;
            data.extend_from_slice(&part.data);
            batch += part.batch;
        }
        Ok(Self::from_parts(data, batch, first.time, first.channels))
    }
}

pub(crate) fn ensure_axis(axis: Axis, left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(TpsError::Dimension { axis, left, right })
    }
}

/// A look-back window `[B, t, C]` with its forecast horizon `[B, h, C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    lookback: SeriesBatch,
    horizon: SeriesBatch,
}

impl SplitPair {
    pub fn new(lookback: SeriesBatch, horizon: SeriesBatch) -> Result<Self> {
        ensure_axis(Axis::Batch, lookback.batch, horizon.batch)?;
        ensure_axis(Axis::Channel, lookback.channels, horizon.channels)?;
        Ok(Self { lookback, horizon })
    }

    pub fn lookback(&self) -> &SeriesBatch {
        &self.lookback
    }

    pub fn horizon(&self) -> &SeriesBatch {
        &self.horizon
    }

    pub fn into_parts(self) -> (SeriesBatch, SeriesBatch) {
        (self.lookback, self.horizon)
    }

    pub fn batch(&self) -> usize {
        self.lookback.batch
    }

    pub fn channels(&self) -> usize {
        self.lookback.channels
    }

    /// Look-back length `t`.
    pub fn lookback_len(&self) -> usize {
        self.lookback.time
    }

    /// Horizon length `h`.
    pub fn horizon_len(&self) -> usize {
        self.horizon.time
    }

    /// Keeps only the samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            lookback: self.lookback.select(indices)?,
            horizon: self.horizon.select(indices)?,
        })
    }
}

/// Joins look-back and horizon along time: `[L, F]`, shape `[B, t+h, C]`.
pub fn concat_time(lookback: &SeriesBatch, horizon: &SeriesBatch) -> Result<SeriesBatch> {
    ensure_axis(Axis::Batch, lookback.batch, horizon.batch)?;
    ensure_axis(Axis::Channel, lookback.channels, horizon.channels)?;
    let time = lookback.time + horizon.time;
    let mut data = Vec::with_capacity(lookback.batch * time * lookback.channels);
    for b in 0..lookback.batch {
        data.extend_from_slice(lookback.sample(b));
        data.extend_from_slice(horizon.sample(b));
    }
    Ok(SeriesBatch::from_parts(
        data,
        lookback.batch,
        time,
        lookback.channels,
    ))
}

impl SplitPair {
    /// The concatenated `[B, t+h, C]` series.
    pub fn concat(&self) -> SeriesBatch {
        concat_time(&self.lookback, &self.horizon).expect("SplitPair invariants hold")
    }
}

/// Cuts `x` at time `t` into `(x[:, 0:t, :], x[:, t:T, :])`.
pub fn split_time(x: &SeriesBatch, t: usize) -> Result<SplitPair> {
    if t == 0 || t >= x.time {
        return Err(TpsError::Bounds {
            what: "split point",
            index: t,
            valid: format!("1..{}", x.time),
        });
    }
    let c = x.channels;
    let h = x.time - t;
    let mut left = Vec::with_capacity(x.batch * t * c);
    let mut right = Vec::with_capacity(x.batch * h * c);
    for sample in x.samples() {
        let (l, r) = sample.split_at(t * c);
        left.extend_from_slice(l);
        right.extend_from_slice(r);
    }
    Ok(SplitPair {
        lookback: SeriesBatch::from_parts(left, x.batch, t, c),
        horizon: SeriesBatch::from_parts(right, x.batch, h, c),
    })
}

/// Stacks synthetic samples after the originals: `[L; S_L]`, `[F; S_F]`.
pub fn merge_batches(original: &SplitPair, synthetic: &SplitPair) -> Result<SplitPair> {
    ensure_axis(Axis::Time, original.lookback_len(), synthetic.lookback_len())?;
    ensure_axis(Axis::Time, original.horizon_len(), synthetic.horizon_len())?;
    ensure_axis(Axis::Channel, original.channels(), synthetic.channels())?;
    Ok(SplitPair {
        lookback: SeriesBatch::concat_batch(&[&original.lookback, &synthetic.lookback])?,
        horizon: SeriesBatch::concat_batch(&[&original.horizon, &synthetic.horizon])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(values: &[f64], b: usize, t: usize, c: usize) -> SeriesBatch {
        SeriesBatch::new(values.to_vec(), b, t, c).unwrap()
    }

    #[test]
    fn concat_small() {
        let l = batch(&[1.0, 2.0], 1, 2, 1);
        let f = batch(&[3.0], 1, 1, 1);
        let x = concat_time(&l, &f).unwrap();
        assert_eq!(x.shape(), [1, 3, 1]);
        assert_eq!(x.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_length_lookback_rejected() {
        assert!(SeriesBatch::new(vec![], 1, 0, 1).is_err());
    }

    #[test]
    fn concat_reports_offending_axis() {
        let l = batch(&[1.0, 2.0], 1, 1, 2);
        let f = batch(&[3.0], 1, 1, 1);
        match concat_time(&l, &f) {
            Err(TpsError::Dimension { axis, .. }) => assert_eq!(axis, Axis::Channel),
            other => panic!("unexpected {other:?}"),
        }
        let f2 = batch(&[3.0, 4.0, 5.0, 6.0], 2, 1, 2);
        match concat_time(&l, &f2) {
            Err(TpsError::Dimension { axis, .. }) => assert_eq!(axis, Axis::Batch),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_small() {
        let x = batch(&[1.0, 2.0, 3.0], 1, 3, 1);
        let pair = split_time(&x, 2).unwrap();
        assert_eq!(pair.lookback().as_slice(), &[1.0, 2.0]);
        assert_eq!(pair.horizon().as_slice(), &[3.0]);
        assert!(matches!(split_time(&x, 3), Err(TpsError::Bounds { .. })));
        assert!(matches!(split_time(&x, 0), Err(TpsError::Bounds { .. })));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            SeriesBatch::new(vec![1.0, f64::NAN], 1, 2, 1),
            Err(TpsError::Data(_))
        ));
    }

    #[test]
    fn merge_doubles_batch() {
        let x = SeriesBatch::from_fn(2, 5, 3, |b, t, c| (b * 100 + t * 10 + c) as f64).unwrap();
        let pair = split_time(&x, 3).unwrap();
        let merged = merge_batches(&pair, &pair).unwrap();
        assert_eq!(merged.batch(), 4);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let x = SeriesBatch::from_fn(2, 5, 3, |b, t, c| (b * 100 + t * 10 + c) as f64).unwrap();
        let pair = split_time(&x, 3).unwrap();
        let empty = SplitPair::new(
            SeriesBatch::empty(3, 3).unwrap(),
            SeriesBatch::empty(2, 3).unwrap(),
        )
        .unwrap();
        assert_eq!(merge_batches(&pair, &empty).unwrap(), pair);
    }

    #[test]
    fn merge_rejects_mismatched_horizon() {
        let x = SeriesBatch::from_fn(1, 5, 1, |_, t, _| t as f64).unwrap();
        let a = split_time(&x, 3).unwrap();
        let b = split_time(&x, 2).unwrap();
        assert!(matches!(
            merge_batches(&a, &b),
            Err(TpsError::Dimension { axis: Axis::Time, .. })
        ));
    }

    fn arb_batch() -> impl Strategy<Value = SeriesBatch> {
        (1usize..4, 2usize..20, 1usize..4).prop_flat_map(|(b, t, c)| {
            proptest::collection::vec(-1e6f64..1e6, b * t * c)
                .prop_map(move |v| SeriesBatch::new(v, b, t, c).unwrap())
        })
    }

    proptest! {
        #[test]
        fn split_concat_round_trip(x in arb_batch(), cut in 0usize..1000) {
            let t = 1 + cut % (x.time() - 1);
            let pair = split_time(&x, t).unwrap();
            prop_assert_eq!(concat_time(pair.lookback(), pair.horizon()).unwrap(), x.clone());
            let again = split_time(&pair.concat(), t).unwrap();
            prop_assert_eq!(again, pair);
        }

        #[test]
        fn merge_keeps_originals_first(x in arb_batch(), y in arb_batch()) {
            let t = 1;
            let ox = split_time(&x, t).unwrap();
            let y = SeriesBatch::from_fn(y.batch(), x.time(), x.channels(), |b, tt, c| {
                y.as_slice()[(b * 7 + tt * 3 + c) % y.as_slice().len()]
            }).unwrap();
            let sy = split_time(&y, t).unwrap();
            let merged = merge_batches(&ox, &sy).unwrap();
            let n = x.batch() * x.channels();
            prop_assert_eq!(&merged.lookback().as_slice()[..n], ox.lookback().as_slice());
            prop_assert_eq!(&merged.lookback().as_slice()[n..], sy.lookback().as_slice());
        }
    }
}

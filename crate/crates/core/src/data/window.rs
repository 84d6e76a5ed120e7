use crate::error::{Result, TpsError};
use crate::series::{SeriesBatch, SplitPair};

/// Number of windows `[k, k+t)`, `[k+t, k+t+h)` with `k` stepping by `stride`.
pub fn window_count(len: usize, lookback: usize, horizon: usize, stride: usize) -> usize {
    if stride == 0 || len < lookback + horizon {
        0
    } else {
        (len - lookback - horizon) / stride + 1
    }
}

/// Sliding `(look-back, horizon)` windows over one series, grouped into
/// batches of at most `batch_size` windows.
#[derive(Debug, Clone)]
pub struct WindowBatches<'a> {
    series: &'a SeriesBatch,
    lookback: usize,
    horizon: usize,
    batch_size: usize,
    stride: usize,
    next: usize,
    total: usize,
}

/// Stride-1 windows over a `[1, len, C]` split.
pub fn window_batches(
    split: &SeriesBatch,
    lookback: usize,
    horizon: usize,
    batch_size: usize,
) -> Result<WindowBatches<'_>> {
    WindowBatches::new(split, lookback, horizon, batch_size, 1)
}

impl<'a> WindowBatches<'a> {
    pub fn new(
        series: &'a SeriesBatch,
        lookback: usize,
        horizon: usize,
        batch_size: usize,
        stride: usize,
    ) -> Result<Self> {
        if series.batch() != 1 {
            return Err(TpsError::Data(format!(
                "windowing expects a single series, got batch of {}",
                series.batch()
            )));
        }
        if lookback == 0 || horizon == 0 || batch_size == 0 || stride == 0 {
            return Err(TpsError::Config(format!(
                "t, h, batch size and window stride must be positive (t={lookback}, h={horizon}, batch={batch_size}, stride={stride})"
            )));
        }
        if series.time() < lookback + horizon {
            return Err(TpsError::Data(format!(
                "split of {} steps is shorter than t + h = {}",
                series.time(),
                lookback + horizon
            )));
        }
        Ok(Self {
            series,
            lookback,
            horizon,
            batch_size,
            stride,
            next: 0,
            total: window_count(series.time(), lookback, horizon, stride),
        })
    }

    /// Total number of windows across all batches.
    pub fn windows(&self) -> usize {
        self.total
    }

    fn window(&self, k: usize, out_l: &mut Vec<f64>, out_f: &mut Vec<f64>) {
        let c = self.series.channels();
        let start = k * self.stride;
        let s = self.series.sample(0);
        out_l.extend_from_slice(&s[start * c..(start + self.lookback) * c]);
        out_f.extend_from_slice(
            &s[(start + self.lookback) * c..(start + self.lookback + self.horizon) * c],
        );
    }
}

impl Iterator for WindowBatches<'_> {
    type Item = SplitPair;

    fn next(&mut self) -> Option<SplitPair> {
        if self.next >= self.total {
            return None;
        }
        let end = (self.next + self.batch_size).min(self.total);
        let n = end - self.next;
        let c = self.series.channels();
        let mut l = Vec::with_capacity(n * self.lookback * c);
        let mut f = Vec::with_capacity(n * self.horizon * c);
        for k in self.next..end {
            self.window(k, &mut l, &mut f);
        }
        self.next = end;
        Some(
            SplitPair::new(
                SeriesBatch::from_parts(l, n, self.lookback, c),
                SeriesBatch::from_parts(f, n, self.horizon, c),
            )
            .expect("windows share batch and channel dims"),
        )
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next).div_ceil(self.batch_size);
        (left, Some(left))
    }
}

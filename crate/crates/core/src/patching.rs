//! Sliding-window unfold and overlap-averaged fold.

use crate::error::{Result, TpsError};
use crate::par;
use crate::series::SeriesBatch;

/// Window layout over a series of length `source_len`: patch `i` covers
/// `[i·stride, i·stride + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchGeometry {
    len: usize,
    stride: usize,
    source_len: usize,
}

impl PatchGeometry {
    pub fn new(source_len: usize, len: usize, stride: usize) -> Result<Self> {
        if len == 0 {
            return Err(TpsError::Geometry("patch length must be at least 1".into()));
        }
        if stride == 0 {
            return Err(TpsError::Geometry("stride must be at least 1".into()));
        }
        if len > source_len {
            return Err(TpsError::Geometry(format!(
                "patch length {len} exceeds series length {source_len}"
            )));
        }
        Ok(Self {
            len,
            stride,
            source_len,
        })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// `floor((T − p)/s + 1)`; at least 1 for any valid geometry.
    pub fn num_patches(&self) -> usize {
        (self.source_len - self.len) / self.stride + 1
    }

    #[inline]
    pub fn start(&self, patch: usize) -> usize {
        patch * self.stride
    }

    /// True when every time index lies in at least one window.
    pub fn is_fully_covered(&self) -> bool {
        self.stride <= self.len && (self.source_len - self.len).is_multiple_of(self.stride)
    }
}

/// Per-time-index window counts `K_τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageProfile {
    counts: Vec<usize>,
}

impl CoverageProfile {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn is_full(&self) -> bool {
        self.counts.iter().all(|&k| k > 0)
    }

    pub fn uncovered(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == 0)
            .map(|(t, _)| t)
    }
}

impl PatchGeometry {
    pub fn coverage(&self) -> CoverageProfile {
        let mut counts = vec![0usize; self.source_len];
        for i in 0..self.num_patches() {
            let start = self.start(i);
            for k in &mut counts[start..start + self.len] {
                *k += 1;
            }
        }
        CoverageProfile { counts }
    }
}

pub fn coverage(source_len: usize, len: usize, stride: usize) -> Result<CoverageProfile> {
    Ok(PatchGeometry::new(source_len, len, stride)?.coverage())
}

/// Patch tensor `[B, N_p, C, p]`: `data[b, i, c, j] == x[b, i·s + j, c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchTensor {
    data: Vec<f64>,
    batch: usize,
    channels: usize,
    geometry: PatchGeometry,
}

impl PatchTensor {
    /// Wraps a raw `[B, N_p, C, p]` buffer.
    pub fn from_raw(
        data: Vec<f64>,
        batch: usize,
        channels: usize,
        geometry: PatchGeometry,
    ) -> Result<Self> {
        let expected = batch * geometry.num_patches() * channels * geometry.len();
        if data.len() != expected || channels == 0 {
            return Err(TpsError::Geometry(format!(
                "buffer of {} values does not match [{batch}, {}, {channels}, {}]",
                data.len(),
                geometry.num_patches(),
                geometry.len()
            )));
        }
        Ok(Self {
            data,
            batch,
            channels,
            geometry,
        })
    }

    pub fn geometry(&self) -> PatchGeometry {
        self.geometry
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_patches(&self) -> usize {
        self.geometry.num_patches()
    }

    /// Values per patch, `C·p`.
    pub fn patch_size(&self) -> usize {
        self.channels * self.geometry.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, b: usize, i: usize, c: usize, j: usize) -> f64 {
        let p = self.geometry.len();
        self.data[((b * self.num_patches() + i) * self.channels + c) * p + j]
    }

    /// The `[C, p]` block of patch `i` in element `b`.
    pub fn patch(&self, b: usize, i: usize) -> &[f64] {
        let size = self.patch_size();
        let at = (b * self.num_patches() + i) * size;
        &self.data[at..at + size]
    }

    /// All patches of element `b`, `[N_p, C, p]`.
    pub fn element(&self, b: usize) -> &[f64] {
        let size = self.patch_size() * self.num_patches();
        &self.data[b * size..(b + 1) * size]
    }

    pub(crate) fn elements_mut(&mut self) -> (usize, &mut [f64]) {
        (self.patch_size() * self.num_patches(), &mut self.data)
    }
}

/// Extracts every length-`p` window at stride `s` along time.
pub fn unfold(x: &SeriesBatch, len: usize, stride: usize) -> Result<PatchTensor> {
    let geometry = PatchGeometry::new(x.time(), len, stride)?;
    let [batch, _, channels] = x.shape();
    let n_patches = geometry.num_patches();
    let element_size = n_patches * channels * len;
    let mut data = vec![0.0; batch * element_size];
    par::for_each_chunk_mut(&mut data, element_size, |b, out| {
        let sample = x.sample(b);
        for i in 0..n_patches {
            let start = geometry.start(i);
            let patch = &mut out[i * channels * len..(i + 1) * channels * len];
            for j in 0..len {
                let row = &sample[(start + j) * channels..(start + j + 1) * channels];
                for (c, &v) in row.iter().enumerate() {
                    patch[c * len + j] = v;
                }
            }
        }
    });
    Ok(PatchTensor {
        data,
        batch,
        channels,
        geometry,
    })
}

/// Places every patch back at its window and averages each time index over
/// the `K_τ` windows covering it.
///
/// Indices with `K_τ = 0` (a stride that does not tile the series) are copied
/// from `passthrough`, which must then have shape `[B, T, C]`.
pub fn reconstruct(patches: &PatchTensor, passthrough: Option<&SeriesBatch>) -> Result<SeriesBatch> {
    let geometry = patches.geometry;
    let (batch, channels) = (patches.batch, patches.channels);
    let time = geometry.source_len();
    let profile = geometry.coverage();
    if let Some(first_gap) = profile.uncovered().next() {
        match passthrough {
            None => return Err(TpsError::Uncovered { index: first_gap }),
            Some(src) if src.shape() != [batch, time, channels] => {
                return Err(TpsError::Geometry(format!(
                    "pass-through shape {:?} does not match [{batch}, {time}, {channels}]",
                    src.shape()
                )));
            }
            Some(_) => {}
        }
    }
    let counts = profile.counts();
    let len = geometry.len();
    let n_patches = geometry.num_patches();
    let sample_size = time * channels;
    let mut data = vec![0.0; batch * sample_size];
    par::for_each_chunk_mut(&mut data, sample_size, |b, out| {
        // Ascending patch index, then one division per entry: the summation
        // order is fixed regardless of scheduling.
        for i in 0..n_patches {
            let start = geometry.start(i);
            let patch = patches.patch(b, i);
            for j in 0..len {
                let row = &mut out[(start + j) * channels..(start + j + 1) * channels];
                for (c, acc) in row.iter_mut().enumerate() {
                    *acc += patch[c * len + j];
                }
            }
        }
        for (t, &k) in counts.iter().enumerate() {
            let row = &mut out[t * channels..(t + 1) * channels];
            if k == 0 {
                let src = passthrough.expect("checked above").sample(b);
                row.copy_from_slice(&src[t * channels..(t + 1) * channels]);
            } else if k > 1 {
                let k = k as f64;
                row.iter_mut().for_each(|v| *v /= k);
            }
        }
    });
    Ok(SeriesBatch::from_parts(data, batch, time, channels))
}

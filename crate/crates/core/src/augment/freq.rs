//! Frequency-domain ablation: the patch kernel runs on the one-sided
//! spectrum with real and imaginary parts stacked as `2C` channels.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, TpsError};
use crate::par;
use crate::rng::RngStream;
use crate::series::SeriesBatch;

use super::pipeline::shuffle_series_planned;
use super::shuffle::{plan_shuffle_with, Selection, ShufflePlan};
use super::variance::PatchScores;
use super::TpsConfig;

/// Imaginary residue above this (relative to the signal scale) after the
/// inverse transform is reported as an error.
const RESIDUE_TOLERANCE: f64 = 1e-9;

/// `[B, T, C]` → `[B, ⌊T/2⌋+1, 2C]`: channel `c` holds `Re X_c[k]`, channel
/// `C + c` holds `Im X_c[k]`. Unnormalized forward DFT along time.
pub fn to_spectrum(x: &SeriesBatch) -> SeriesBatch {
    let [batch, time, channels] = x.shape();
    let bins = time / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(time);
    let out_channels = 2 * channels;
    let mut data = vec![0.0; batch * bins * out_channels];
    par::for_each_chunk_mut(&mut data, bins * out_channels, |b, out| {
        let mut buf = vec![Complex64::default(); time];
        for c in 0..channels {
            for (t, z) in buf.iter_mut().enumerate() {
                *z = Complex64::new(x.get(b, t, c), 0.0);
            }
            fft.process(&mut buf);
            for (k, z) in buf[..bins].iter().enumerate() {
                out[k * out_channels + c] = z.re;
                out[k * out_channels + channels + c] = z.im;
            }
        }
    });
    SeriesBatch::from_parts(data, batch, bins, out_channels)
}

/// Inverse of [`to_spectrum`] for a real series of length `time`.
///
/// Negative frequencies are filled by conjugate symmetry; the imaginary parts
/// of the DC bin and (for even `time`) the Nyquist bin are dropped, as a real
/// signal cannot carry them.
pub fn from_spectrum(spec: &SeriesBatch, time: usize) -> Result<SeriesBatch> {
    let [batch, bins, stacked] = spec.shape();
    if bins != time / 2 + 1 || stacked % 2 != 0 {
        return Err(TpsError::Geometry(format!(
            "spectrum [{batch}, {bins}, {stacked}] does not describe a real series of length {time}"
        )));
    }
    let channels = stacked / 2;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(time);
    let scale = 1.0 / time as f64;
    let mut data = vec![0.0; batch * time * channels];
    let residues = par::map_range(batch, |b| {
        let mut buf = vec![Complex64::default(); time];
        let mut out = vec![0.0; time * channels];
        let mut residue = 0.0f64;
        let mut peak = 1.0f64;
        for c in 0..channels {
            for k in 0..bins {
                let mut z = Complex64::new(spec.get(b, k, c), spec.get(b, k, channels + c));
                if k == 0 || 2 * k == time {
                    z.im = 0.0;
                }
                buf[k] = z;
                if k > 0 && time - k >= bins {
                    buf[time - k] = z.conj();
                }
            }
            ifft.process(&mut buf);
            for (t, z) in buf.iter().enumerate() {
                let v = z.re * scale;
                out[t * channels + c] = v;
                residue = residue.max((z.im * scale).abs());
                peak = peak.max(v.abs());
            }
        }
        (out, residue / peak)
    });
    for (b, (values, residue)) in residues.into_iter().enumerate() {
        if residue > RESIDUE_TOLERANCE {
            return Err(TpsError::Data(format!(
                "inverse transform left imaginary residue {residue:e} in sample {b}"
            )));
        }
        data[b * time * channels..(b + 1) * time * channels].copy_from_slice(&values);
    }
    Ok(SeriesBatch::from_parts(data, batch, time, channels))
}

/// Shuffle in the spectral domain and transform back.
pub fn frequency_shuffle(x: &SeriesBatch, cfg: &TpsConfig, streams: &[RngStream]) -> Result<SeriesBatch> {
    frequency_shuffle_planned(x, cfg, |scores| {
        plan_shuffle_with(scores, cfg.alpha, streams, Selection::LowestVariance)
    })
}

/// [`frequency_shuffle`] with an explicit plan over the spectral patches.
pub fn frequency_shuffle_planned(
    x: &SeriesBatch,
    cfg: &TpsConfig,
    make_plan: impl FnOnce(&PatchScores) -> Result<ShufflePlan>,
) -> Result<SeriesBatch> {
    let spec = to_spectrum(x);
    if cfg.patch_len > spec.time() {
        return Err(TpsError::Geometry(format!(
            "patch length {} exceeds the {} frequency bins of a length-{} series",
            cfg.patch_len,
            spec.time(),
            x.time()
        )));
    }
    let shuffled = shuffle_series_planned(
        &spec,
        cfg.patch_len,
        cfg.stride,
        Selection::LowestVariance,
        make_plan,
    )?;
    from_spectrum(&shuffled, x.time())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_round_trip() {
        for time in [1usize, 2, 3, 8, 17, 64] {
            let x = SeriesBatch::from_fn(2, time, 3, |b, t, c| {
                ((b * 13 + t * 7 + c * 3) % 11) as f64 - 5.0 + (t as f64).sin()
            })
            .unwrap();
            let spec = to_spectrum(&x);
            assert_eq!(spec.shape(), [2, time / 2 + 1, 6]);
            let back = from_spectrum(&spec, time).unwrap();
            for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
                assert!((a - b).abs() < 1e-9, "T={time}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dc_bin_holds_sum() {
        let x = SeriesBatch::from_fn(1, 4, 1, |_, t, _| t as f64).unwrap();
        let spec = to_spectrum(&x);
        assert!((spec.get(0, 0, 0) - 6.0).abs() < 1e-12);
        assert_eq!(spec.get(0, 0, 1), 0.0);
    }

    #[test]
    fn shuffled_spectrum_stays_real() {
        let x = SeriesBatch::from_fn(3, 48, 2, |b, t, c| ((t * (b + 2) + c) as f64 * 0.37).cos())
            .unwrap();
        let cfg = TpsConfig::new(4, 2, 1.0);
        let streams: Vec<_> = (0..3).map(|b| RngStream::new(1).derive(b)).collect();
        let out = frequency_shuffle(&x, &cfg, &streams).unwrap();
        assert_eq!(out.shape(), x.shape());
        assert_ne!(out, x);
    }

    #[test]
    fn patch_wider_than_spectrum_rejected() {
        let x = SeriesBatch::from_fn(1, 10, 1, |_, t, _| t as f64).unwrap();
        let cfg = TpsConfig::new(7, 1, 1.0);
        let streams = [RngStream::new(0)];
        assert!(matches!(
            frequency_shuffle(&x, &cfg, &streams),
            Err(TpsError::Geometry(_))
        ));
    }
}

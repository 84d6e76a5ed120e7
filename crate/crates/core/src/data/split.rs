use serde::{Deserialize, Serialize};

use crate::error::{Result, TpsError};
use crate::series::SeriesBatch;

/// Chronological split sizes, either as row counts or as fractions of the file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitSizes {
    Rows { train: usize, val: usize, test: usize },
    Fractions { train: f64, val: f64, test: f64 },
}

impl SplitSizes {
    /// Row counts for a file of `total` rows.
    pub fn resolve(&self, total: usize) -> Result<(usize, usize, usize)> {
        let (train, val, test) = match *self {
            SplitSizes::Rows { train, val, test } => (train, val, test),
            SplitSizes::Fractions { train, val, test } => {
                if [train, val, test].iter().any(|f| !(0.0..=1.0).contains(f))
                    || train + val + test > 1.0 + 1e-12
                {
                    return Err(TpsError::Config(format!(
                        "split fractions must be non-negative and sum to at most 1: {train}, {val}, {test}"
                    )));
                }
                let rows = |f: f64| (f * total as f64 + 1e-9).floor() as usize;
                (rows(train), rows(val), rows(test))
            }
        };
        if train == 0 {
            return Err(TpsError::Config("training split is empty".into()));
        }
        if train + val + test > total {
            return Err(TpsError::Config(format!(
                "split sizes ({train}, {val}, {test}) exceed the {total} available rows"
            )));
        }
        Ok((train, val, test))
    }
}

/// Train/validation/test sizes listed for the standard benchmarks.
pub fn benchmark_split(name: &str) -> Option<SplitSizes> {
    let (train, val, test) = match name.to_ascii_lowercase().as_str() {
        "etth1" | "etth2" => (8545, 2881, 2881),
        "ettm1" | "ettm2" => (34465, 11521, 11521),
        "exchange" => (5120, 665, 1422),
        "weather" => (36792, 5271, 10540),
        "ecl" | "electricity" => (18317, 2633, 5261),
        "traffic" => (12185, 1757, 3509),
        "ili" => (629, 98, 194),
        "pems03" => (15617, 5135, 5135),
        "pems04" => (10172, 3375, 3375),
        "pems07" => (16911, 5622, 5622),
        "pems08" => (10690, 3548, 3548),
        _ => return None,
    };
    Some(SplitSizes::Rows { train, val, test })
}

/// What to do with a channel whose training values are constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantChannel {
    #[default]
    Reject,
    /// Leave the channel unscaled (mean 0, std 1).
    PassThrough,
}

/// Per-channel mean and population standard deviation of the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ChannelStats {
    pub fn fit(train: &SeriesBatch, policy: ConstantChannel) -> Result<Self> {
        let channels = train.channels();
        let n = (train.batch() * train.time()) as f64;
        let mut mean = vec![0.0; channels];
        let mut std = vec![0.0; channels];
        for c in 0..channels {
            let values = train.channel_values(c);
            let m = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            if var > 0.0 {
                mean[c] = m;
                std[c] = var.sqrt();
            } else {
                match policy {
                    ConstantChannel::Reject => {
                        return Err(TpsError::Data(format!(
                            "channel {c} is constant on the training split"
                        )))
                    }
                    ConstantChannel::PassThrough => std[c] = 1.0,
                }
            }
        }
        Ok(Self { mean, std })
    }

    fn map(&self, x: &SeriesBatch, f: impl Fn(f64, f64, f64) -> f64) -> Result<SeriesBatch> {
        if x.channels() != self.mean.len() {
            return Err(TpsError::Data(format!(
                "statistics for {} channels applied to {}",
                self.mean.len(),
                x.channels()
            )));
        }
        let c = x.channels();
        let data = x
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &v)| f(v, self.mean[i % c], self.std[i % c]))
            .collect();
        SeriesBatch::new(data, x.batch(), x.time(), c)
    }

    pub fn standardize(&self, x: &SeriesBatch) -> Result<SeriesBatch> {
        self.map(x, |v, m, s| (v - m) / s)
    }

    pub fn destandardize(&self, x: &SeriesBatch) -> Result<SeriesBatch> {
        self.map(x, |v, m, s| v * s + m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: SeriesBatch,
    pub val: SeriesBatch,
    pub test: SeriesBatch,
    pub stats: ChannelStats,
}

fn rows(x: &SeriesBatch, start: usize, len: usize) -> Result<SeriesBatch> {
    let c = x.channels();
    if len == 0 {
        return SeriesBatch::empty(1, c);
    }
    SeriesBatch::new(x.sample(0)[start * c..(start + len) * c].to_vec(), 1, len, c)
}

/// Contiguous chronological splits of a `[1, N, C]` series, all standardized
/// with statistics from the training split. Empty val/test splits are
/// returned as zero-sample batches.
pub fn split_standardize(x: &SeriesBatch, sizes: &SplitSizes, policy: ConstantChannel) -> Result<Splits> {
    if x.batch() != 1 {
        return Err(TpsError::Data(format!(
            "expected a single full-length series, got batch of {}",
            x.batch()
        )));
    }
    let (n_train, n_val, n_test) = sizes.resolve(x.time())?;
    let train = rows(x, 0, n_train)?;
    let stats = ChannelStats::fit(&train, policy)?;
    let standardize = |s: SeriesBatch| -> Result<SeriesBatch> {
        if s.is_empty() {
            Ok(s)
        } else {
            stats.standardize(&s)
        }
    };
    Ok(Splits {
        train: stats.standardize(&train)?,
        val: standardize(rows(x, n_train, n_val)?)?,
        test: standardize(rows(x, n_train + n_val, n_test)?)?,
        stats,
    })
}

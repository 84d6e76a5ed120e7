use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use tps_core::data::{benchmark_split, ColumnSelector, ConstantChannel, DatasetSpec, SplitSizes};
use tps_core::{Level, Method, TpsConfig, Variant};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "tps", version, about = "Temporal patch shuffle augmentation for time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write original and synthetic windows for one split of a CSV dataset.
    Augment(AugmentArgs),
    /// Pick (p, s, alpha) by validation score of a cheap forecaster.
    Sweep(SweepArgs),
    /// Distribution-shift and error metrics between original and augmented windows.
    Report(ReportArgs),
    /// Check the implementation against brute-force references.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    NoVarianceOrder,
    NonOverlapping,
    InputOnly,
    FrequencyDomain,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::NoVarianceOrder => Variant::NoVarianceOrder,
            VariantArg::NonOverlapping => Variant::NonOverlapping,
            VariantArg::InputOnly => Variant::InputOnly,
            VariantArg::FrequencyDomain => Variant::FrequencyDomain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Batch,
    Sample,
}

impl From<LevelArg> for Level {
    fn from(v: LevelArg) -> Self {
        match v {
            LevelArg::Batch => Level::Batch,
            LevelArg::Sample => Level::Sample,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Tps,
    Upsample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerArg {
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Let the later index win ties during patch selection.
    TieBreak,
}

/// Where the data comes from and how it is cut into windows.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Channel columns by name or index (default: all but the timestamp).
    #[arg(long, value_delimiter = ',')]
    pub channels: Vec<String>,
    /// Benchmark name whose published split sizes should be used (e.g. ETTh2).
    #[arg(long)]
    pub dataset: Option<String>,
    /// Split as "train,val,test" row counts or fractions.
    #[arg(long, conflicts_with = "dataset")]
    pub split: Option<String>,
    /// Look-back length.
    #[arg(long)]
    pub t: Option<usize>,
    /// Horizon length.
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Step between consecutive window starts.
    #[arg(long, default_value_t = 1)]
    pub window_stride: usize,
    /// Leave constant training channels unscaled instead of failing.
    #[arg(long)]
    pub keep_constant: bool,
}

impl DataArgs {
    pub fn spec(&self) -> Result<DatasetSpec> {
        let path = self
            .data
            .clone()
            .ok_or_else(|| CliError::Config("--data is required".into()))?;
        let (t, h) = match (self.t, self.h) {
            (Some(t), Some(h)) => (t, h),
            _ => return Err(CliError::Config("--t and --h are required".into())),
        };
        let mut spec = DatasetSpec::new(path, t, h);
        spec.channels = self
            .channels
            .iter()
            .map(|c| c.parse::<ColumnSelector>().expect("infallible"))
            .collect();
        if let Some(name) = &self.dataset {
            spec.split = benchmark_split(name)
                .ok_or_else(|| CliError::Config(format!("no published split for dataset {name:?}")))?;
        }
        if let Some(split) = &self.split {
            spec.split = parse_split(split)?;
        }
        Ok(spec)
    }

    pub fn constant_policy(&self) -> ConstantChannel {
        if self.keep_constant {
            ConstantChannel::PassThrough
        } else {
            ConstantChannel::Reject
        }
    }
}

/// "8545,2881,2881" as rows, "0.7,0.1,0.2" as fractions.
pub fn parse_split(text: &str) -> Result<SplitSizes> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Config(format!("--split expects train,val,test, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    if parts.iter().all(|p| p.parse::<usize>().is_ok()) {
        let n: Vec<usize> = parts.iter().map(|p| p.parse().unwrap()).collect();
        return Ok(SplitSizes::Rows {
            train: n[0],
            val: n[1],
            test: n[2],
        });
    }
    let f: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    Ok(SplitSizes::Fractions {
        train: f[0],
        val: f[1],
        test: f[2],
    })
}

/// Augmentation method and its parameters.
#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Tps)]
    pub method: MethodArg,
    /// Patch length.
    #[arg(long)]
    pub p: Option<usize>,
    /// Patch stride.
    #[arg(long)]
    pub s: Option<usize>,
    /// Shuffle rate in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = LevelArg::Batch)]
    pub level: LevelArg,
    /// Segment length as a fraction of the window (Upsample only).
    #[arg(long, default_value_t = 0.5)]
    pub segment_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl MethodArgs {
    pub fn method(&self) -> Result<Method> {
        match self.method {
            MethodArg::Tps => {
                let (p, s) = match (self.p, self.s) {
                    (Some(p), Some(s)) => (p, s),
                    _ => return Err(CliError::Config("--p and --s are required for TPS".into())),
                };
                Ok(Method::Tps(
                    TpsConfig::new(p, s, self.alpha)
                        .with_seed(self.seed)
                        .with_variant(self.variant.into())
                        .with_level(self.level.into()),
                ))
            }
            MethodArg::Upsample => Ok(Method::Upsample {
                segment_rate: self.segment_rate,
            }),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Synthetic replicas per original batch.
    #[arg(long, default_value_t = 1)]
    pub size: usize,
    /// Fraction of each synthetic replica kept.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    /// Split to augment.
    #[arg(long, value_enum, default_value_t = Partition::Train)]
    pub partition: Partition,
    /// Output windows file; the manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Re-run the plan recorded in a manifest and verify the output hashes.
    #[arg(long, conflicts_with = "data")]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// One "p,s,alpha" tuple per line (default: built-in grid of 20).
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScorerArg::Ridge)]
    pub scorer: ScorerArg,
    /// Ridge penalty.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = LevelArg::Batch)]
    pub level: LevelArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ranked results as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Augment the training split with the winner into this file.
    #[arg(long)]
    pub apply: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Windows file; its original windows are the reference.
    #[arg(long, requires = "augmented", conflicts_with = "data")]
    pub original: Option<PathBuf>,
    /// Windows file; its synthetic windows are compared.
    #[arg(long, requires = "original")]
    pub augmented: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_enum, default_value_t = Partition::Train)]
    pub partition: Partition,
    /// Metrics as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Seed for the random instances.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Deliberately break one rule to confirm the checks catch it.
    #[arg(long, value_enum)]
    pub inject_fault: Option<Fault>,
}

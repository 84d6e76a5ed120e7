use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use tps_core::augment::augment_batch;
use tps_core::data::{AugmentedWriter, ConstantChannel, DatasetSpec, WindowBatches};
use tps_core::{Method, RngStream, SplitPair};

use super::Prepared;
use crate::args::{AugmentArgs, Partition};
use crate::error::{CliError, Result};
use crate::manifest::{digest, manifest_path, RunManifest, Timings};

/// A fully resolved augmentation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    pub dataset: DatasetSpec,
    pub constant_channels: ConstantChannel,
    pub partition: Partition,
    pub batch_size: usize,
    pub window_stride: usize,
    pub method: Method,
    /// Batch `n`, replica `r` draws from `RngStream::new(seed).derive(n).derive(r)`.
    pub seed: u64,
    pub size: usize,
    pub ratio: f64,
    pub out: PathBuf,
}

impl AugmentPlan {
    pub fn from_args(args: &AugmentArgs) -> Result<Self> {
        let out = args
            .out
            .clone()
            .ok_or_else(|| CliError::Config("--out is required".into()))?;
        if args.data.batch_size == 0 || args.data.window_stride == 0 {
            return Err(CliError::Config("--batch-size and --window-stride must be positive".into()));
        }
        Ok(Self {
            dataset: args.data.spec()?,
            constant_channels: args.data.constant_policy(),
            partition: args.partition,
            batch_size: args.data.batch_size,
            window_stride: args.data.window_stride,
            method: args.method.method()?,
            seed: args.method.seed,
            size: args.size,
            ratio: args.ratio,
            out,
        })
    }
}

/// Running per-channel sums for mean and standard deviation.
#[derive(Debug, Clone, Default)]
struct Moments {
    n: Vec<f64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(channels: usize) -> Self {
        Self {
            n: vec![0.0; channels],
            sum: vec![0.0; channels],
            sum_sq: vec![0.0; channels],
        }
    }

    fn add(&mut self, values: &[f64]) {
        let c = self.n.len();
        for row in values.chunks_exact(c) {
            for (k, &v) in row.iter().enumerate() {
                self.n[k] += 1.0;
                self.sum[k] += v;
                self.sum_sq[k] += v * v;
            }
        }
    }

    fn mean_std(&self) -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = self.sum.iter().zip(&self.n).map(|(s, n)| if *n > 0.0 { s / n } else { 0.0 }).collect();
        let std = self
            .sum_sq
            .iter()
            .zip(&self.n)
            .zip(&mean)
            .map(|((q, n), m)| if *n > 0.0 { (q / n - m * m).max(0.0).sqrt() } else { 0.0 })
            .collect();
        (mean, std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub rows: [usize; 3],
    pub channels: Vec<String>,
    pub lookback: usize,
    pub horizon: usize,
    pub batches: usize,
    pub windows_original: usize,
    pub windows_synthetic: usize,
    pub original_mean: Vec<f64>,
    pub original_std: Vec<f64>,
    pub synthetic_mean: Vec<f64>,
    pub synthetic_std: Vec<f64>,
}

impl AugmentSummary {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "rows (train, val, test): {:?}\nwindows: {} original, {} synthetic in {} batches (t={}, h={})\n",
            self.rows, self.windows_original, self.windows_synthetic, self.batches, self.lookback, self.horizon
        );
        out.push_str(&format!(
            "{:<12} {:>10} {:>10} {:>10} {:>10}\n",
            "channel", "orig mean", "orig std", "syn mean", "syn std"
        ));
        for (k, name) in self.channels.iter().enumerate() {
            out.push_str(&format!(
                "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4}\n",
                name, self.original_mean[k], self.original_std[k], self.synthetic_mean[k], self.synthetic_std[k]
            ));
        }
        out
    }
}

/// Executes `plan`, writing the windows file and its manifest.
pub fn run_plan(plan: &AugmentPlan) -> Result<RunManifest> {
    let started = Instant::now();
    if !(0.0..=1.0).contains(&plan.ratio) {
        return Err(CliError::Config(format!("--ratio must lie in [0, 1], got {}", plan.ratio)));
    }
    let input = digest(&plan.dataset.path)?;
    let prepared = Prepared::load(&plan.dataset, plan.constant_channels)?;
    plan.method.validate(prepared.dataset.channels())?;
    let load_ms = started.elapsed().as_secs_f64() * 1e3;

    let augment_start = Instant::now();
    let split = prepared.partition(plan.partition);
    let windows = WindowBatches::new(
        split,
        plan.dataset.lookback,
        plan.dataset.horizon,
        plan.batch_size,
        plan.window_stride,
    )?;
    let channels = split.channels();
    if let Some(dir) = plan.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut writer = AugmentedWriter::create(&plan.out, channels)?;
    let root = RngStream::new(plan.seed);
    let (mut orig, mut syn) = (Moments::new(channels), Moments::new(channels));
    let (mut n_orig, mut n_syn, mut batches) = (0, 0, 0);
    for (n, pair) in windows.enumerate() {
        let merged = augment_batch(&pair, &plan.method, plan.size, plan.ratio, root.derive(n as u64))?;
        writer.write_batch(&merged, pair.batch())?;
        let all = merged.concat();
        let split_at = pair.batch() * all.time() * channels;
        orig.add(&all.as_slice()[..split_at]);
        syn.add(&all.as_slice()[split_at..]);
        n_orig += pair.batch();
        n_syn += merged.batch() - pair.batch();
        batches += 1;
    }
    writer.finish()?;
    let augment_ms = augment_start.elapsed().as_secs_f64() * 1e3;

    let (original_mean, original_std) = orig.mean_std();
    let (synthetic_mean, synthetic_std) = syn.mean_std();
    let summary = AugmentSummary {
        rows: [prepared.splits.train.time(), prepared.splits.val.time(), prepared.splits.test.time()],
        channels: prepared.dataset.channel_names.clone(),
        lookback: plan.dataset.lookback,
        horizon: plan.dataset.horizon,
        batches,
        windows_original: n_orig,
        windows_synthetic: n_syn,
        original_mean,
        original_std,
        synthetic_mean,
        synthetic_std,
    };
    let manifest = RunManifest {
        tool: "tps".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        plan: plan.clone(),
        inputs: vec![input],
        outputs: vec![digest(&plan.out)?],
        summary,
        timings: Timings {
            load_ms,
            augment_ms,
            total_ms: started.elapsed().as_secs_f64() * 1e3,
        },
    };
    manifest.write(&manifest_path(&plan.out))?;
    Ok(manifest)
}

/// Re-runs a recorded plan and fails if any input or output hash differs.
pub fn replay(manifest_file: &Path, out: Option<PathBuf>) -> Result<RunManifest> {
    let recorded = RunManifest::read(manifest_file)?;
    for input in &recorded.inputs {
        let now = digest(&input.path)?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Data(format!(
                "input {} changed since the recorded run",
                input.path.display()
            )));
        }
    }
    let mut plan = recorded.plan.clone();
    if let Some(out) = out {
        plan.out = out;
    }
    let fresh = run_plan(&plan)?;
    for (was, now) in recorded.outputs.iter().zip(&fresh.outputs) {
        if was.sha256 != now.sha256 {
            return Err(CliError::Data(format!(
                "replayed output {} differs from the recorded run (sha256 {} vs {})",
                now.path.display(),
                now.sha256,
                was.sha256
            )));
        }
    }
    Ok(fresh)
}

pub fn run(args: &AugmentArgs) -> Result<()> {
    let manifest = match &args.replay {
        Some(path) => {
            let m = replay(path, args.out.clone())?;
            println!("replay matches recorded output hashes");
            m
        }
        None => run_plan(&AugmentPlan::from_args(args)?)?,
    };
    print!("{}", manifest.summary.to_text());
    for out in &manifest.outputs {
        println!("wrote {} ({} bytes, sha256 {})", out.path.display(), out.bytes, out.sha256);
    }
    println!(
        "manifest {} ({:.0} ms)",
        manifest_path(&manifest.plan.out).display(),
        manifest.timings.total_ms
    );
    Ok(())
}

/// Stacks the concatenated windows of a sequence of pairs.
pub fn stack_windows<'a>(pairs: impl IntoIterator<Item = &'a SplitPair>) -> Result<tps_core::SeriesBatch> {
    let all: Vec<_> = pairs.into_iter().map(SplitPair::concat).collect();
    let refs: Vec<&_> = all.iter().collect();
    Ok(tps_core::SeriesBatch::concat_batch(&refs)?)
}

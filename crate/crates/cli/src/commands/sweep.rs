use serde::Serialize;

use tps_core::sweep::{RidgeScorer, SweepGrid, SweepOutcome, SweepSetup};
use tps_core::{Method, TpsConfig};

use super::augment::{run_plan, AugmentPlan};
use super::Prepared;
use crate::args::{Partition, ScorerArg, SweepArgs};
use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
struct SweepRecord<'a> {
    scorer: &'a str,
    grid: &'a SweepGrid,
    #[serde(flatten)]
    outcome: &'a SweepOutcome,
}

pub fn table(outcome: &SweepOutcome) -> String {
    let mut out = format!("no augmentation: {:.6}\n", outcome.baseline);
    out.push_str(&format!("{:>4} {:>5} {:>5} {:>5} {:>6} {:>12}\n", "rank", "tuple", "p", "s", "alpha", "val_mse"));
    for (rank, e) in outcome.ranked.iter().enumerate() {
        out.push_str(&format!(
            "{:>4} {:>5} {:>5} {:>5} {:>6} {:>12.6}\n",
            rank + 1,
            e.index,
            e.candidate.patch_len,
            e.candidate.stride,
            e.candidate.alpha,
            e.score
        ));
    }
    out
}

pub fn run(args: &SweepArgs) -> Result<()> {
    let grid = match &args.grid_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            SweepGrid::parse(&text)?
        }
        None => SweepGrid::default_grid(),
    };
    if grid.candidates.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let spec = args.data.spec()?;
    let prepared = Prepared::load(&spec, args.data.constant_policy())?;
    let base = TpsConfig::new(1, 1, 1.0)
        .with_seed(args.seed)
        .with_variant(args.variant.into())
        .with_level(args.level.into());
    let setup = SweepSetup {
        train: &prepared.splits.train,
        val: &prepared.splits.val,
        lookback: spec.lookback,
        horizon: spec.horizon,
        batch_size: args.data.batch_size,
        window_stride: args.data.window_stride,
        base,
    };
    let scorer = match args.scorer {
        ScorerArg::Ridge => RidgeScorer { lambda: args.lambda },
    };
    let outcome = setup.run(&grid, &scorer)?;
    for s in &outcome.skipped {
        log::warn!("skipping tuple {} {}: {}", s.index, s.candidate, s.reason);
    }
    print!("{}", table(&outcome));
    if let Some(out) = &args.out {
        let record = SweepRecord {
            scorer: "ridge",
            grid: &grid,
            outcome: &outcome,
        };
        let text = serde_json::to_string_pretty(&record).expect("sweep serializes") + "\n";
        std::fs::write(out, text).map_err(|e| CliError::io(out, e))?;
    }
    let best = outcome
        .best()
        .ok_or_else(|| CliError::Config("no grid tuple is valid for this data".into()))?;
    println!("selected {} (tuple {})", best.candidate, best.index);
    if let Some(apply) = &args.apply {
        let cfg = TpsConfig {
            patch_len: best.candidate.patch_len,
            stride: best.candidate.stride,
            alpha: best.candidate.alpha,
            ..base
        };
        let plan = AugmentPlan {
            dataset: spec,
            constant_channels: args.data.constant_policy(),
            partition: Partition::Train,
            batch_size: args.data.batch_size,
            window_stride: args.data.window_stride,
            method: Method::Tps(cfg),
            seed: args.seed,
            size: args.size,
            ratio: args.ratio,
            out: apply.clone(),
        };
        let manifest = run_plan(&plan)?;
        println!(
            "wrote {} ({} original, {} synthetic windows)",
            apply.display(),
            manifest.summary.windows_original,
            manifest.summary.windows_synthetic
        );
    }
    Ok(())
}

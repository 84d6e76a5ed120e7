use tps_core::data::{read_augmented, AugmentedFile, Role, WindowBatches};
use tps_core::metrics::{distribution_shift_report, mae, mse, Aggregation, MetricsReport};
use tps_core::{RngStream, SeriesBatch};

use super::augment::stack_windows;
use super::Prepared;
use crate::args::ReportArgs;
use crate::error::{CliError, Result};

/// Shift metrics plus point errors of `augmented` against `original`.
pub fn compare(original: &SeriesBatch, augmented: &SeriesBatch) -> Result<MetricsReport> {
    if original.shape() != augmented.shape() {
        return Err(CliError::Data(format!(
            "window shapes differ: original {:?}, augmented {:?}",
            original.shape(),
            augmented.shape()
        )));
    }
    let mut report = distribution_shift_report(original, augmented)?;
    report.push("mse", mse(original, augmented)?, Aggregation::Global)?;
    report.push("mae", mae(original, augmented)?, Aggregation::Global)?;
    Ok(report)
}

/// Windows of `role` when the file has any, otherwise every window.
fn windows_of(file: &AugmentedFile, role: Role) -> Result<SeriesBatch> {
    let pick = if file.count(role) > 0 { Some(role) } else { None };
    Ok(file.stack(pick)?)
}

fn from_files(args: &ReportArgs) -> Result<MetricsReport> {
    let (Some(orig), Some(aug)) = (&args.original, &args.augmented) else {
        unreachable!("clap enforces both")
    };
    let original = windows_of(&read_augmented(orig)?, Role::Original)?;
    let augmented = windows_of(&read_augmented(aug)?, Role::Synthetic)?;
    compare(&original, &augmented)
}

fn from_data(args: &ReportArgs) -> Result<MetricsReport> {
    let spec = args.data.spec()?;
    let method = args.method.method()?;
    let prepared = Prepared::load(&spec, args.data.constant_policy())?;
    method.validate(prepared.dataset.channels())?;
    let windows = WindowBatches::new(
        prepared.partition(args.partition),
        spec.lookback,
        spec.horizon,
        args.data.batch_size,
        args.data.window_stride,
    )?;
    let root = RngStream::new(args.method.seed);
    let mut originals = Vec::new();
    let mut synthetic = Vec::new();
    for (n, pair) in windows.enumerate() {
        synthetic.push(method.synthesize(&pair, root.derive(n as u64).derive(0))?);
        originals.push(pair);
    }
    compare(&stack_windows(&originals)?, &stack_windows(&synthetic)?)
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let report = if args.original.is_some() {
        from_files(args)?
    } else {
        from_data(args)?
    };
    print!("{}", report.to_table());
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_json()).map_err(|e| CliError::io(out, e))?;
    }
    Ok(())
}

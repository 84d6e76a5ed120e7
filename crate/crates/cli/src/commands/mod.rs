pub mod augment;
pub mod report;
pub mod selftest;
pub mod sweep;

use tps_core::data::{load_csv, split_standardize, ConstantChannel, Dataset, DatasetSpec, Splits};
use tps_core::SeriesBatch;

use crate::args::Partition;
use crate::error::Result;

/// A loaded, split and standardized dataset.
pub struct Prepared {
    pub dataset: Dataset,
    pub splits: Splits,
}

impl Prepared {
    pub fn load(spec: &DatasetSpec, policy: ConstantChannel) -> Result<Self> {
        let dataset = load_csv(spec)?;
        let splits = split_standardize(&dataset.values, &spec.split, policy)?;
        Ok(Self { dataset, splits })
    }

    pub fn partition(&self, which: Partition) -> &SeriesBatch {
        match which {
            Partition::Train => &self.splits.train,
            Partition::Val => &self.splits.val,
            Partition::Test => &self.splits.test,
        }
    }
}

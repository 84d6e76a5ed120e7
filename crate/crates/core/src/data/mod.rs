//! Dataset ingestion, chronological splits, train-statistics standardization,
//! sliding windows and augmented-output persistence.

mod load;
mod output;
mod split;
mod window;

pub use load::{load_csv, ColumnSelector, Dataset, DatasetSpec};
pub use output::{read_augmented, write_augmented, AugmentedFile, AugmentedWriter, Role, Window};
pub use split::{benchmark_split, split_standardize, ChannelStats, ConstantChannel, SplitSizes, Splits};
pub use window::{window_batches, window_count, WindowBatches};

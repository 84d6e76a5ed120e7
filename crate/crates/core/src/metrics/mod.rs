//! Point, probabilistic and distribution-shift metrics.

mod point;
mod quantile;
mod report;
mod shift;

pub use point::{mae, mse};
pub use quantile::{crps, pi80, pinball, IntervalStats, QuantileSet, DEFAULT_LEVELS};
pub use report::{Aggregation, MetricValue, MetricsReport};
pub use shift::{distribution_shift_report, dtw, ks_statistic, wasserstein1};

//! Temporal patch shuffle (TPS) augmentation for time-series models.
//!
//! The crate is organized bottom-up:
//!
//! * [`series`]: `[batch, time, channel]` containers and shape algebra.
//! * [`rng`]: keyed random streams.
//! * [`patching`]: sliding-window unfold and overlap-averaged reconstruction.
//! * [`augment`]: variance-aware patch shuffling, its ablation variants, the
//!   classification form and the Upsample baseline.
//! * [`metrics`]: point, quantile and distribution-shift metrics.
//! * [`data`]: CSV loading, splits, standardization, windowing, output files.
//! * [`sweep`]: validation-based hyperparameter search.
//!
//! Per-element work runs on rayon when the `parallel` feature is enabled
//! (the default). Results are identical with or without it.

pub mod augment;
pub mod data;
pub mod error;
pub mod metrics;
pub mod par;
pub mod patching;
pub mod rng;
pub mod series;
pub mod sweep;

pub use augment::{Level, Method, TpsConfig, Variant};
pub use error::{Result, TpsError};
pub use patching::{coverage, reconstruct, unfold, CoverageProfile, PatchGeometry, PatchTensor};
pub use rng::RngStream;
pub use series::{concat_time, merge_batches, split_time, SeriesBatch, SplitPair};
